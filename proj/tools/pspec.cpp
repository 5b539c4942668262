// pspec: polyspectra toolkit for blinking-emitter click records.
//
// Subcommands: simulate, thin, estimate, model-spectra, fit, subset-errors,
// plot-export. Every output file gets a "<path>.meta.json" sidecar carrying
// the tool version, the resolved argument list, and the seeds, so any run
// can be reproduced bit-for-bit from its echo.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pspec/errors.hpp"
#include "pspec/estimator.hpp"
#include "pspec/fit.hpp"
#include "pspec/io.hpp"
#include "pspec/model.hpp"
#include "pspec/sim.hpp"
#include "pspec/spectra_model.hpp"
#include "pspec/version.hpp"

using namespace pspec;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitParse = 4;
constexpr int kExitInsufficient = 5;
constexpr int kExitIo = 6;

struct Common {
    uint64_t seed = 0;
    int threads = 0;
    bool force = false;
    int verbose = 0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "random seed (64-bit)");
    cmd->add_option("--threads", c.threads, "cap worker threads (0 = all cores)");
    cmd->add_flag("--force", c.force, "overwrite existing outputs");
    cmd->add_flag("-v,--verbose", c.verbose, "chatty progress output");
    cmd->set_config("--config", "", "flat key=value file; command line overrides");
}

void apply_threads(const Common& c) {
    if (c.threads > 0) omp_set_num_threads(c.threads);
}

std::string fmt(double v) { return format_double(v); }

json base_meta(const std::string& subcommand, const std::vector<std::string>& argv,
               const Common& c) {
    return json{{"tool_version", kToolVersion},
                {"format_version", kFormatVersion},
                {"rng", kRngName},
                {"subcommand", subcommand},
                {"argv", argv},
                {"seed", c.seed},
                {"threads", c.threads}};
}

void write_meta(const std::string& out_path, const json& meta, bool force) {
    std::string p = out_path + ".meta.json";
    check_output_path(p, force);
    write_text_file(p, meta.dump(1));
}

// ---- estimate options shared by estimate and subset-errors ----------------

struct EstimateOpts {
    double frame_s = 0;
    double rate_sum_guess_khz = 0;
    int n_freq = 64;
    double max_freq_khz = 0;
    std::string window = "confined_gaussian";
    double sigma_rel = 0.14;
    std::string orders = "1234";
    int resampling = 100;
    int batches = 10;
    bool unit_weights = false;
    double duration_s = 0; // optional override when reading clicks
};

void add_estimate_opts(CLI::App* cmd, EstimateOpts& e) {
    cmd->add_option("--frame-s", e.frame_s, "frame length T in seconds");
    cmd->add_option("--rate-sum-guess", e.rate_sum_guess_khz,
                    "gamma_in+gamma_out guess (kHz); derives T so 2*pi/T resolves it by 10");
    cmd->add_option("--n-freq", e.n_freq, "grid points per axis");
    cmd->add_option("--max-freq-khz", e.max_freq_khz,
                    "grid span (kHz angular); 0 = raw frame comb");
    cmd->add_option("--window", e.window, "confined_gaussian | rectangular");
    cmd->add_option("--window-sigma", e.sigma_rel, "confined Gaussian sigma_t/T");
    cmd->add_option("--orders", e.orders, "subset of 1234");
    cmd->add_option("--resampling", e.resampling, "Monte Carlo resampling realizations R");
    cmd->add_option("--batches", e.batches, "error-estimation batches B");
    cmd->add_flag("--unit-weights", e.unit_weights, "diagnostic: b=1 instead of Exp(1)");
    cmd->add_option("--duration-s", e.duration_s, "record duration override (seconds)");
}

EstimationConfig to_config(const EstimateOpts& e, const Common& c, double duration_ms) {
    EstimationConfig cfg;
    if (e.frame_s > 0) {
        cfg.frame_length_ms = seconds_to_ms(e.frame_s);
    } else if (e.rate_sum_guess_khz > 0) {
        double t = 2 * 3.14159265358979324 * 10 / e.rate_sum_guess_khz;
        // keep at least 200 frames
        cfg.frame_length_ms = std::min(t, duration_ms / 200.0);
    } else {
        throw ConfigError("either --frame-s or --rate-sum-guess is required");
    }
    cfg.n_freq = e.n_freq;
    cfg.max_freq_khz = e.max_freq_khz;
    if (e.window == "confined_gaussian")
        cfg.window = WindowKind::ConfinedGaussian;
    else if (e.window == "rectangular")
        cfg.window = WindowKind::Rectangular;
    else
        throw ConfigError("unknown window: " + e.window);
    cfg.window_sigma_rel = e.sigma_rel;
    for (int i = 0; i < 4; ++i) cfg.orders[i] = false;
    for (char ch : e.orders) {
        if (ch < '1' || ch > '4') throw ConfigError("orders must be a subset of 1234");
        cfg.orders[ch - '1'] = true;
    }
    cfg.resampling_count = e.resampling;
    cfg.batch_count = e.batches;
    cfg.seed = c.seed;
    cfg.unit_weights = e.unit_weights;
    cfg.parallel = true;
    return cfg;
}

std::vector<std::string> estimate_argv(const EstimateOpts& e, const EstimationConfig& cfg,
                                       const Common& c) {
    std::vector<std::string> v;
    v.insert(v.end(), {"--frame-s", fmt(ms_to_seconds(cfg.frame_length_ms))});
    v.insert(v.end(), {"--n-freq", std::to_string(cfg.n_freq)});
    v.insert(v.end(), {"--max-freq-khz", fmt(cfg.max_freq_khz)});
    v.insert(v.end(), {"--window", e.window});
    v.insert(v.end(), {"--window-sigma", fmt(cfg.window_sigma_rel)});
    std::string orders;
    for (int i = 0; i < 4; ++i)
        if (cfg.orders[i]) orders += static_cast<char>('1' + i);
    v.insert(v.end(), {"--orders", orders});
    v.insert(v.end(), {"--resampling", std::to_string(cfg.resampling_count)});
    v.insert(v.end(), {"--batches", std::to_string(cfg.batch_count)});
    if (cfg.unit_weights) v.push_back("--unit-weights");
    v.insert(v.end(), {"--seed", std::to_string(c.seed)});
    if (c.threads > 0) v.insert(v.end(), {"--threads", std::to_string(c.threads)});
    return v;
}

std::optional<double> duration_override(const EstimateOpts& e) {
    if (e.duration_s > 0) return e.duration_s;
    return std::nullopt;
}

// ---- subcommands -----------------------------------------------------------

int run_simulate(const Common& c, const EmitterParams& p, double duration_s, bool binary,
                 bool exact4, const std::string& out, const std::string& occupation_out) {
    const double duration_ms = seconds_to_ms(duration_s);
    check_output_path(out, c.force);

    ClickRecord clicks;
    if (exact4) {
        clicks = simulate_emitter_clicks_exact(p, duration_ms, c.seed);
    } else {
        OccupationPath path = simulate_occupation(p.gamma_in, p.gamma_out, duration_ms, c.seed);
        clicks = simulate_clicks(path, p.gamma_ph, c.seed);
        if (!occupation_out.empty()) {
            check_output_path(occupation_out, c.force);
            write_occupation(occupation_out, path);
        }
    }
    if (binary)
        write_clicks_binary(out, clicks);
    else
        write_clicks_text(out, clicks);

    std::vector<std::string> argv = {"simulate",
                                     "--gamma-in", fmt(p.gamma_in),
                                     "--gamma-out", fmt(p.gamma_out),
                                     "--gamma-ph", fmt(p.gamma_ph),
                                     "--gamma-det", fmt(p.gamma_det),
                                     "--beta-sq", fmt(p.beta_sq),
                                     "--duration-s", fmt(duration_s),
                                     "--seed", std::to_string(c.seed),
                                     "--out", out};
    if (binary) argv.push_back("--binary");
    if (exact4) argv.push_back("--exact-four-state");
    json meta = base_meta("simulate", argv, c);
    meta["duration_s"] = duration_s;
    meta["n_clicks"] = clicks.size();
    meta["params"] = {{"gamma_in_khz", p.gamma_in},
                      {"gamma_out_khz", p.gamma_out},
                      {"gamma_ph_khz", p.gamma_ph},
                      {"gamma_det_khz", p.gamma_det},
                      {"beta_sq_khz", p.beta_sq}};
    meta["exact_four_state"] = exact4;
    write_meta(out, meta, c.force);
    if (c.verbose)
        std::fprintf(stderr, "simulate: %llu clicks over %g s -> %s\n",
                     static_cast<unsigned long long>(clicks.size()), duration_s, out.c_str());
    return 0;
}

int run_thin(const Common& c, const std::string& in, double alpha, bool binary,
             const std::string& out, double duration_s_opt) {
    // Work on the stored payload directly so surviving timestamps keep their
    // exact file representation (alpha = 1 is a byte-identical copy).
    RawClicks raw = read_clicks_raw(in, duration_s_opt > 0 ? std::optional<double>(duration_s_opt)
                                                           : std::nullopt);
    check_output_path(out, c.force);
    std::vector<uint8_t> keep = thin_mask(raw.t_s.size(), alpha, c.seed);
    RawClicks thinned;
    thinned.duration_s = raw.duration_s;
    for (size_t i = 0; i < raw.t_s.size(); ++i)
        if (keep[i]) thinned.t_s.push_back(raw.t_s[i]);
    if (binary)
        write_clicks_binary_raw(out, thinned);
    else
        write_clicks_text_raw(out, thinned);
    std::vector<std::string> argv = {"thin", "--in", in, "--alpha", fmt(alpha),
                                     "--seed", std::to_string(c.seed), "--out", out};
    if (binary) argv.push_back("--binary");
    json meta = base_meta("thin", argv, c);
    meta["duration_s"] = thinned.duration_s;
    meta["n_clicks"] = thinned.t_s.size();
    meta["alpha"] = alpha;
    meta["input"] = in;
    write_meta(out, meta, c.force);
    return 0;
}

int run_estimate(const Common& c, const EstimateOpts& e, const std::string& in,
                 const std::string& out) {
    ClickRecord rec = read_clicks(in, duration_override(e));
    EstimationConfig cfg = to_config(e, c, rec.duration_ms);
    check_output_path(out, c.force);
    SpectraSet s = estimate_spectra(rec, cfg);

    // Track the thinning fraction from the input sidecar when present.
    std::filesystem::path meta_in = in + ".meta.json";
    if (std::filesystem::exists(meta_in)) {
        json mj = read_json_file(meta_in.string());
        if (mj.contains("alpha")) s.alpha = mj["alpha"].get<double>();
    }

    std::vector<std::string> argv = {"estimate", "--in", in, "--out", out};
    auto extra = estimate_argv(e, cfg, c);
    argv.insert(argv.end(), extra.begin(), extra.end());
    argv.insert(argv.end(), {"--duration-s", fmt(ms_to_seconds(rec.duration_ms))});
    json meta = base_meta("estimate", argv, c);
    meta["input"] = in;
    write_spectra(out, s, meta);
    write_meta(out, meta, c.force);
    return 0;
}

int run_model_spectra(const Common& c, const EmitterParams& p, bool have_params,
                      const std::string& model_file, int n_freq, double grid_max_khz,
                      const std::string& grid_from, bool shot_term, const std::string& orders,
                      const std::string& out) {
    LindbladSystem sys;
    json sys_json;
    if (have_params) {
        sys = emitter_system(p);
        sys_json = {{"emitter_params",
                     {{"gamma_in_khz", p.gamma_in},
                      {"gamma_out_khz", p.gamma_out},
                      {"gamma_ph_khz", p.gamma_ph},
                      {"gamma_det_khz", p.gamma_det},
                      {"beta_sq_khz", p.beta_sq}}}};
    } else if (!model_file.empty()) {
        sys = system_from_json(read_json_file(model_file));
        sys_json = {{"model_file", model_file}};
    } else {
        throw ConfigError("model-spectra needs either emitter parameters or --model");
    }
    check_output_path(out, c.force);

    ModelSpectraOptions opts;
    opts.include_shot_noise = shot_term;
    for (int i = 0; i < 4; ++i) opts.orders[i] = false;
    for (char ch : orders) {
        if (ch < '1' || ch > '4') throw ConfigError("orders must be a subset of 1234");
        opts.orders[ch - '1'] = true;
    }

    SpectraSet out_set;
    if (!grid_from.empty()) {
        SpectraSet ref = read_spectra(grid_from);
        FrequencyGrid grid;
        grid.values = ref.freq_khz;
        grid.validate();
        ModelSpectra m = evaluate_model_spectra(sys, grid, opts);
        out_set = model_spectra_as_set(m);
        out_set.axis_j = ref.axis_j;
        out_set.stride = ref.stride;
        out_set.comb_khz = ref.comb_khz;
        out_set.config = ref.config;
    } else {
        if (grid_max_khz <= 0) throw ConfigError("--grid-max-khz (or --grid-from) is required");
        FrequencyGrid grid = FrequencyGrid::linspace(-grid_max_khz, grid_max_khz, n_freq);
        ModelSpectra m = evaluate_model_spectra(sys, grid, opts);
        out_set = model_spectra_as_set(m);
        out_set.config.n_freq = n_freq;
        out_set.config.frame_length_ms = 1.0; // placeholder; no frames behind a model
    }
    for (int i = 0; i < 4; ++i) out_set.config.orders[i] = opts.orders[i];

    std::vector<std::string> argv = {"model-spectra", "--out", out};
    if (have_params) {
        const std::pair<const char*, double> kv[] = {{"--gamma-in", p.gamma_in},
                                                     {"--gamma-out", p.gamma_out},
                                                     {"--gamma-ph", p.gamma_ph},
                                                     {"--gamma-det", p.gamma_det},
                                                     {"--beta-sq", p.beta_sq}};
        for (const auto& [k, v] : kv) {
            argv.push_back(k);
            argv.push_back(fmt(v));
        }
    } else {
        argv.insert(argv.end(), {"--model", model_file});
    }
    if (!grid_from.empty()) {
        argv.insert(argv.end(), {"--grid-from", grid_from});
    } else {
        argv.insert(argv.end(), {"--grid-max-khz", fmt(grid_max_khz)});
        argv.insert(argv.end(), {"--n-freq", std::to_string(n_freq)});
    }
    argv.insert(argv.end(), {"--orders", orders});
    if (shot_term) argv.push_back("--shot-term");
    json meta = base_meta("model-spectra", argv, c);
    meta["system"] = sys_json;
    meta["model"] = true;
    meta["shot_term"] = shot_term;
    write_spectra(out, out_set, meta);
    write_meta(out, meta, c.force);
    return 0;
}

FitConfig make_fit_config(const Common& c, const std::string& orders, double gamma_det,
                          int max_evals, int subsets) {
    FitConfig fc;
    for (int i = 0; i < 4; ++i) fc.orders[i] = false;
    for (char ch : orders) {
        if (ch < '1' || ch > '4') throw ConfigError("orders must be a subset of 1234");
        fc.orders[ch - '1'] = true;
    }
    fc.gamma_det_fixed = gamma_det;
    fc.max_evals = max_evals;
    fc.n_subsets = subsets;
    fc.seed = c.seed;
    return fc;
}

int run_fit(const Common& c, const std::string& spectra_file, const std::string& clicks_file,
            const std::string& orders, double gamma_det, int max_evals, double duration_s_opt,
            const std::string& out) {
    SpectraSet s = read_spectra(spectra_file);
    if (!clicks_file.empty()) {
        // The click record is authoritative for the count constraint.
        ClickRecord rec =
            read_clicks(clicks_file, duration_s_opt > 0 ? std::optional<double>(duration_s_opt)
                                                        : std::nullopt);
        if (rec.size() != s.n_clicks)
            std::fprintf(stderr,
                         "warning: click file has %llu clicks but the spectra metadata says "
                         "%llu; using the file\n",
                         static_cast<unsigned long long>(rec.size()),
                         static_cast<unsigned long long>(s.n_clicks));
        s.n_clicks = rec.size();
        s.duration_ms = rec.duration_ms;
    }
    check_output_path(out, c.force);
    FitConfig fc = make_fit_config(c, orders, gamma_det, max_evals, 1);
    FitResult r = fit(s, fc);

    std::vector<std::string> argv = {"fit", "--spectra", spectra_file, "--out", out,
                                     "--orders", orders, "--gamma-det", fmt(gamma_det),
                                     "--max-evals", std::to_string(max_evals),
                                     "--seed", std::to_string(c.seed)};
    if (!clicks_file.empty()) argv.insert(argv.end(), {"--clicks", clicks_file});
    json meta = base_meta("fit", argv, c);
    meta["spectra_file"] = spectra_file;
    write_fit(out, r, fc, meta);
    write_meta(out, meta, c.force);
    std::printf("gamma_in = %s kHz, gamma_out = %s kHz, beta_sq = %s kHz, gamma_ph = %s kHz\n",
                fmt(r.gamma_in).c_str(), fmt(r.gamma_out).c_str(), fmt(r.beta_sq).c_str(),
                fmt(r.gamma_ph).c_str());
    return 0;
}

int run_subset_errors(const Common& c, const EstimateOpts& e, const std::string& clicks_file,
                      double alpha, const std::string& orders, double gamma_det, int max_evals,
                      int subsets, const std::string& out) {
    ClickRecord rec = read_clicks(clicks_file, duration_override(e));
    EstimationConfig cfg = to_config(e, c, rec.duration_ms);
    check_output_path(out, c.force);
    FitConfig fc = make_fit_config(c, orders, gamma_det, max_evals, subsets);
    FitResult r = subset_errors(rec, alpha, cfg, fc);
    for (auto& sub : r.subsets) sub.alpha = alpha;

    // estimate_argv already carries --orders (shared by estimator and fit).
    std::vector<std::string> argv = {"subset-errors", "--clicks", clicks_file,
                                     "--alpha", fmt(alpha), "--out", out,
                                     "--gamma-det", fmt(gamma_det),
                                     "--max-evals", std::to_string(max_evals),
                                     "--subsets", std::to_string(subsets)};
    auto extra = estimate_argv(e, cfg, c);
    argv.insert(argv.end(), extra.begin(), extra.end());
    json meta = base_meta("subset-errors", argv, c);
    meta["clicks_file"] = clicks_file;
    meta["alpha"] = alpha;
    write_fit(out, r, fc, meta);
    write_meta(out, meta, c.force);
    if (r.has_sigma)
        std::printf(
            "gamma_in = %s +- %s kHz, gamma_out = %s +- %s kHz (1 sigma over %d subsets)\n",
            fmt(r.gamma_in).c_str(), fmt(r.gamma_in_sigma).c_str(), fmt(r.gamma_out).c_str(),
            fmt(r.gamma_out_sigma).c_str(), subsets);
    return 0;
}

int run_plot_export(const Common& c, const std::string& spectra_file,
                    const std::string& model_file, const std::string& fit_file,
                    const std::string& prefix) {
    SpectraSet s = read_spectra(spectra_file);
    std::optional<SpectraSet> model;
    if (!model_file.empty()) {
        SpectraSet m = read_spectra(model_file);
        if (m.freq_khz.size() != s.freq_khz.size())
            throw ParseError("model grid does not match the spectra grid; "
                             "generate it with model-spectra --grid-from");
        model = std::move(m);
    }

    const int n = s.n();
    // Row with omega_2 closest to zero for the 2D cuts.
    int row0 = 0;
    for (int i = 0; i < n; ++i)
        if (std::abs(s.freq_khz[i]) < std::abs(s.freq_khz[row0])) row0 = i;

    auto csv = [&](const std::string& name, const std::string& header, auto writer) {
        std::string path = prefix + name;
        check_output_path(path, c.force);
        std::string out = header + "\n";
        writer(out);
        write_text_file(path, out);
    };

    if (s.has_order(2)) {
        csv("s2.csv", "freq_khz,value,sigma,model", [&](std::string& out) {
            for (int i = 0; i < n; ++i) {
                out += fmt(s.freq_khz[i]) + "," + fmt(s.s2[i]) + "," + fmt(s.s2_sigma[i]) + ",";
                if (model) out += fmt(model->s2[i]);
                out += "\n";
            }
        });
    }
    if (s.has_order(3)) {
        csv("s3_cut.csv", "freq_khz,re,im,sigma_re,sigma_im,model_re,model_im",
            [&](std::string& out) {
                for (int i = 0; i < n; ++i) {
                    out += fmt(s.freq_khz[i]) + "," + fmt(s.s3(i, row0).real()) + "," +
                           fmt(s.s3(i, row0).imag()) + "," + fmt(s.s3_sigma_re(i, row0)) + "," +
                           fmt(s.s3_sigma_im(i, row0)) + ",";
                    if (model)
                        out +=
                            fmt(model->s3(i, row0).real()) + "," + fmt(model->s3(i, row0).imag());
                    else
                        out += ",";
                    out += "\n";
                }
            });
    }
    if (s.has_order(4)) {
        csv("s4_cut.csv", "freq_khz,value,sigma,model", [&](std::string& out) {
            for (int i = 0; i < n; ++i) {
                out += fmt(s.freq_khz[i]) + "," + fmt(s.s4(i, row0)) + "," +
                       fmt(s.s4_sigma(i, row0)) + ",";
                if (model) out += fmt(model->s4(i, row0));
                out += "\n";
            }
        });
    }
    if (!fit_file.empty()) {
        json fj = read_json_file(fit_file);
        csv("rates.csv", "alpha,gamma_in_khz,gamma_in_3sigma,gamma_out_khz,gamma_out_3sigma",
            [&](std::string& out) {
                double alpha = fj.value("meta", json::object()).value("alpha", 1.0);
                double si = fj.contains("gamma_in_sigma_khz")
                                ? fj["gamma_in_sigma_khz"].get<double>() * 3
                                : 0.0;
                double so = fj.contains("gamma_out_sigma_khz")
                                ? fj["gamma_out_sigma_khz"].get<double>() * 3
                                : 0.0;
                out += fmt(alpha) + "," + fmt(fj["gamma_in_khz"].get<double>()) + "," + fmt(si) +
                       "," + fmt(fj["gamma_out_khz"].get<double>()) + "," + fmt(so) + "\n";
            });
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum polyspectra toolkit for blinking emitters"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    // simulate
    Common c_sim;
    EmitterParams p_sim{0.27, 0.8, 298.0, 1e5, 1e5};
    double sim_duration_s = 360.0;
    bool sim_binary = false, sim_exact4 = false;
    std::string sim_out, sim_occ_out;
    auto* sim = app.add_subcommand("simulate", "generate a synthetic click record");
    sim->add_option("--gamma-in", p_sim.gamma_in, "bright->dark rate (kHz)");
    sim->add_option("--gamma-out", p_sim.gamma_out, "dark->bright rate (kHz)");
    sim->add_option("--gamma-ph", p_sim.gamma_ph, "photon emission rate in bright state (kHz)");
    sim->add_option("--gamma-det", p_sim.gamma_det, "detector reset rate (kHz)");
    sim->add_option("--beta-sq", p_sim.beta_sq, "measurement strength (kHz)");
    sim->add_option("--duration-s", sim_duration_s, "record length (seconds)");
    sim->add_flag("--binary", sim_binary, "write the binary click format");
    sim->add_flag("--exact-four-state", sim_exact4,
                  "full four-state jump simulation (includes detector dead time)");
    sim->add_option("--occupation-out", sim_occ_out, "also write the occupation path");
    sim->add_option("--out", sim_out, "output click file")->required();
    add_common(sim, c_sim);

    // thin
    Common c_thin;
    std::string thin_in, thin_out;
    double thin_alpha = 1.0, thin_duration_s = 0;
    bool thin_binary = false;
    auto* th = app.add_subcommand("thin", "randomly keep each click with probability alpha");
    th->add_option("--in", thin_in, "input click file")->required();
    th->add_option("--alpha", thin_alpha, "keep probability in (0, 1]")->required();
    th->add_flag("--binary", thin_binary, "write the binary click format");
    th->add_option("--duration-s", thin_duration_s, "duration override (seconds)");
    th->add_option("--out", thin_out, "output click file")->required();
    add_common(th, c_thin);

    // estimate
    Common c_est;
    EstimateOpts est_opts;
    std::string est_in, est_out;
    auto* est = app.add_subcommand("estimate", "polyspectra of a click record");
    est->add_option("--in", est_in, "input click file")->required();
    est->add_option("--out", est_out, "output spectra JSON")->required();
    add_estimate_opts(est, est_opts);
    add_common(est, c_est);

    // model-spectra
    Common c_mod;
    EmitterParams p_mod{0, 0, 0, 1e5, 1e5};
    std::string mod_model_file, mod_out, mod_grid_from, mod_orders = "1234";
    int mod_n_freq = 64;
    double mod_grid_max = 0;
    bool mod_shot = false;
    auto* mod = app.add_subcommand("model-spectra", "analytic polyspectra of a Lindblad model");
    mod->add_option("--gamma-in", p_mod.gamma_in, "emitter model: bright->dark rate (kHz)");
    mod->add_option("--gamma-out", p_mod.gamma_out, "emitter model: dark->bright rate (kHz)");
    mod->add_option("--gamma-ph", p_mod.gamma_ph, "emitter model: emission rate (kHz)");
    mod->add_option("--gamma-det", p_mod.gamma_det, "emitter model: detector rate (kHz)");
    mod->add_option("--beta-sq", p_mod.beta_sq, "measurement strength (kHz)");
    mod->add_option("--model", mod_model_file, "general model definition JSON");
    mod->add_option("--n-freq", mod_n_freq, "grid points per axis");
    mod->add_option("--grid-max-khz", mod_grid_max, "grid span (kHz angular)");
    mod->add_option("--grid-from", mod_grid_from, "evaluate on the grid of this spectra file");
    mod->add_option("--orders", mod_orders, "subset of 1234");
    mod->add_flag("--shot-term", mod_shot, "include the beta^2/4 white-noise floor in S2");
    mod->add_option("--out", mod_out, "output spectra JSON")->required();
    add_common(mod, c_mod);

    // fit
    Common c_fit;
    std::string fit_spectra, fit_clicks, fit_out, fit_orders = "1234";
    double fit_gamma_det = 1e5, fit_duration_s = 0;
    int fit_max_evals = 2000;
    auto* fi = app.add_subcommand("fit", "fit emitter rates to estimated spectra");
    fi->add_option("--spectra", fit_spectra, "estimated spectra JSON")->required();
    fi->add_option("--clicks", fit_clicks, "click file for the count constraint");
    fi->add_option("--orders", fit_orders, "orders used in the objective");
    fi->add_option("--gamma-det", fit_gamma_det, "fixed detector rate (kHz)");
    fi->add_option("--max-evals", fit_max_evals, "objective evaluations per start");
    fi->add_option("--duration-s", fit_duration_s, "clicks duration override (seconds)");
    fi->add_option("--out", fit_out, "output fit JSON")->required();
    add_common(fi, c_fit);

    // subset-errors
    Common c_sub;
    EstimateOpts sub_est;
    std::string sub_clicks, sub_out;
    double sub_alpha = 0.1, sub_gamma_det = 1e5;
    int sub_max_evals = 2000, sub_subsets = 10;
    auto* su =
        app.add_subcommand("subset-errors", "error bars from fits to independent thinnings");
    su->add_option("--clicks", sub_clicks, "input click file")->required();
    su->add_option("--alpha", sub_alpha, "thinning fraction in (0, 1)")->required();
    su->add_option("--subsets", sub_subsets, "number of independent thinnings");
    su->add_option("--gamma-det", sub_gamma_det, "fixed detector rate (kHz)");
    su->add_option("--max-evals", sub_max_evals, "objective evaluations per start");
    su->add_option("--out", sub_out, "output fit JSON")->required();
    add_estimate_opts(su, sub_est);
    add_common(su, c_sub);

    // plot-export
    Common c_plot;
    std::string plot_spectra, plot_model, plot_fit, plot_prefix;
    auto* pl = app.add_subcommand("plot-export", "CSV tables for external plotting");
    pl->add_option("--spectra", plot_spectra, "estimated spectra JSON")->required();
    pl->add_option("--model", plot_model, "model spectra JSON on the same grid");
    pl->add_option("--fit", plot_fit, "fit JSON for the rates table");
    pl->add_option("--out", plot_prefix, "output path prefix")->required();
    add_common(pl, c_plot);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (sim->parsed()) {
            apply_threads(c_sim);
            return run_simulate(c_sim, p_sim, sim_duration_s, sim_binary, sim_exact4, sim_out,
                                sim_occ_out);
        }
        if (th->parsed()) {
            apply_threads(c_thin);
            return run_thin(c_thin, thin_in, thin_alpha, thin_binary, thin_out, thin_duration_s);
        }
        if (est->parsed()) {
            apply_threads(c_est);
            return run_estimate(c_est, est_opts, est_in, est_out);
        }
        if (mod->parsed()) {
            apply_threads(c_mod);
            bool have_params = (p_mod.gamma_in > 0 || p_mod.gamma_out > 0) && mod_model_file.empty();
            return run_model_spectra(c_mod, p_mod, have_params, mod_model_file, mod_n_freq,
                                     mod_grid_max, mod_grid_from, mod_shot, mod_orders, mod_out);
        }
        if (fi->parsed()) {
            apply_threads(c_fit);
            return run_fit(c_fit, fit_spectra, fit_clicks, fit_orders, fit_gamma_det,
                           fit_max_evals, fit_duration_s, fit_out);
        }
        if (su->parsed()) {
            apply_threads(c_sub);
            return run_subset_errors(c_sub, sub_est, sub_clicks, sub_alpha, sub_est.orders,
                                     sub_gamma_det, sub_max_evals, sub_subsets, sub_out);
        }
        if (pl->parsed()) {
            apply_threads(c_plot);
            return run_plot_export(c_plot, plot_spectra, plot_model, plot_fit, plot_prefix);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const InsufficientData& e) {
        std::fprintf(stderr, "insufficient data: %s\n", e.what());
        return kExitInsufficient;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return kExitParse;
    } catch (const std::exception& e) {
        std::string what = e.what();
        std::fprintf(stderr, "error: %s\n", what.c_str());
        if (what.find("output exists") != std::string::npos) return kExitIo;
        return 1;
    }
    return kExitUsage;
}
