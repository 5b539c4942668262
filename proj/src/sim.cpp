#include "pspec/sim.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pspec/rng.hpp"

namespace pspec {

void ClickRecord::validate() const {
    double prev = 0;
    for (double t : t_ms) {
        if (!std::isfinite(t)) throw std::invalid_argument("click time not finite");
        if (t < prev) throw std::invalid_argument("click times must be ascending");
        prev = t;
    }
    if (!t_ms.empty() && t_ms.back() > duration_ms)
        throw std::invalid_argument("click time exceeds record duration");
}

double OccupationPath::bright_time_ms() const {
    double total = 0;
    for (auto [len, bright] : dwells())
        if (bright) total += len;
    return total;
}

std::vector<std::pair<double, bool>> OccupationPath::dwells() const {
    std::vector<std::pair<double, bool>> out;
    double prev = 0;
    bool bright = initial_bright;
    for (double t : switch_times_ms) {
        out.emplace_back(t - prev, bright);
        prev = t;
        bright = !bright;
    }
    out.emplace_back(duration_ms - prev, bright);
    return out;
}

OccupationPath simulate_occupation(double gamma_in, double gamma_out, double duration_ms,
                                   uint64_t seed) {
    if (gamma_in <= 0 || gamma_out <= 0) throw std::invalid_argument("rates must be positive");
    if (duration_ms < 0) throw std::invalid_argument("negative duration");
    Xoshiro256StarStar rng(mix_seed(seed, stream::kOccupation));
    OccupationPath path;
    path.duration_ms = duration_ms;
    double p_bright = gamma_out / (gamma_in + gamma_out);
    path.initial_bright = rng.bernoulli(p_bright);
    bool bright = path.initial_bright;
    double t = 0;
    while (true) {
        double exit_rate = bright ? gamma_in : gamma_out;
        t += rng.exponential() / exit_rate;
        if (t >= duration_ms) break;
        path.switch_times_ms.push_back(t);
        bright = !bright;
    }
    return path;
}

ClickRecord simulate_clicks(const OccupationPath& path, double gamma_ph, uint64_t seed) {
    if (gamma_ph <= 0) throw std::invalid_argument("gamma_ph must be positive");
    Xoshiro256StarStar rng(mix_seed(seed, stream::kClicks));
    ClickRecord rec;
    rec.duration_ms = path.duration_ms;
    double start = 0;
    bool bright = path.initial_bright;
    auto emit_interval = [&](double a, double b) {
        double t = a;
        while (true) {
            t += rng.exponential() / gamma_ph;
            if (t >= b) break;
            rec.t_ms.push_back(t);
        }
    };
    for (double sw : path.switch_times_ms) {
        if (bright) emit_interval(start, sw);
        start = sw;
        bright = !bright;
    }
    if (bright) emit_interval(start, path.duration_ms);
    return rec;
}

ClickRecord simulate_emitter_clicks_exact(const EmitterParams& p, double duration_ms,
                                          uint64_t seed) {
    if (p.gamma_in <= 0 || p.gamma_out <= 0 || p.gamma_ph <= 0 || p.gamma_det <= 0)
        throw std::invalid_argument("all rates must be positive for the jump simulation");
    if (p.gamma_det < 10 * p.gamma_ph)
        std::fprintf(stderr,
                     "warning: gamma_det = %g kHz is not much faster than gamma_ph = %g kHz; "
                     "detector dead time will distort click statistics\n",
                     p.gamma_det, p.gamma_ph);
    Xoshiro256StarStar rng(mix_seed(seed, stream::kExactJump));
    ClickRecord rec;
    rec.duration_ms = duration_ms;

    // States 0..3 = |1..4>. Transitions: (from, to, rate).
    struct Tr {
        int to;
        double rate;
    };
    std::vector<std::vector<Tr>> trans(4);
    trans[0] = {{2, p.gamma_out}};                      // 1 -> 3
    trans[1] = {{3, p.gamma_out}, {0, p.gamma_det}};    // 2 -> 4, 2 -> 1
    trans[2] = {{0, p.gamma_in}, {3, p.gamma_ph}};      // 3 -> 1, 3 -> 4 (click)
    trans[3] = {{1, p.gamma_in}, {2, p.gamma_det}};     // 4 -> 2, 4 -> 3

    // Start from the occupation steady state with no photon in the detector.
    int state = rng.bernoulli(p.bright_fraction()) ? 2 : 0;
    double t = 0;
    while (true) {
        double total = 0;
        for (const auto& tr : trans[state]) total += tr.rate;
        t += rng.exponential() / total;
        if (t >= duration_ms) break;
        double u = rng.uniform() * total;
        int next = trans[state].back().to;
        for (const auto& tr : trans[state]) {
            if (u <= tr.rate) {
                next = tr.to;
                break;
            }
            u -= tr.rate;
        }
        if (state == 2 && next == 3) rec.t_ms.push_back(t); // photon arrival
        state = next;
    }
    return rec;
}

std::vector<double> render_trace(const ClickRecord& clicks, double gamma_det, double dt_ms,
                                 uint64_t seed) {
    if (gamma_det <= 0 || dt_ms <= 0) throw std::invalid_argument("gamma_det and dt must be positive");
    if (dt_ms > 0.2 / gamma_det)
        std::fprintf(stderr,
                     "warning: dt = %g ms is coarse compared to the mean pulse length %g ms\n",
                     dt_ms, 1.0 / gamma_det);
    Xoshiro256StarStar rng(mix_seed(seed, stream::kTrace));
    const auto n = static_cast<size_t>(std::floor(clicks.duration_ms / dt_ms));
    std::vector<double> z(n, 0.0);
    for (double t0 : clicks.t_ms) {
        double len = rng.exponential() / gamma_det;
        auto first = static_cast<size_t>(std::ceil((t0 - 0.5 * dt_ms) / dt_ms));
        auto last = static_cast<size_t>(std::ceil((t0 + len - 0.5 * dt_ms) / dt_ms));
        for (size_t i = first; i < last && i < n; ++i) z[i] = 1.0; // overlap saturates
    }
    return z;
}

} // namespace pspec
