#include "pspec/io.hpp"

#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "pspec/errors.hpp"
#include "pspec/version.hpp"

namespace pspec {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("double formatting failed");
    return std::string(buf, ptr);
}

void check_output_path(const std::string& path, bool force) {
    if (!force && fs::exists(path))
        throw std::runtime_error("output exists (use --force to overwrite): " + path);
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

static constexpr char kMagic[4] = {'P', 'S', 'K', '1'};

void write_clicks_text_raw(const std::string& path, const RawClicks& raw) {
    std::string out;
    out.reserve(raw.t_s.size() * 20);
    for (double t : raw.t_s) {
        out += format_double(t);
        out += '\n';
    }
    write_text_file(path, out);
}

void write_clicks_binary_raw(const std::string& path, const RawClicks& raw) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(kMagic, 4);
    uint64_t n = raw.t_s.size();
    f.write(reinterpret_cast<const char*>(&n), sizeof(n));
    f.write(reinterpret_cast<const char*>(raw.t_s.data()),
            static_cast<std::streamsize>(raw.t_s.size() * sizeof(double)));
    if (!f) throw std::runtime_error("write failed: " + path);
}

void write_clicks_text(const std::string& path, const ClickRecord& rec) {
    RawClicks raw;
    raw.duration_s = ms_to_seconds(rec.duration_ms);
    raw.t_s.resize(rec.t_ms.size());
    for (size_t i = 0; i < raw.t_s.size(); ++i) raw.t_s[i] = ms_to_seconds(rec.t_ms[i]);
    write_clicks_text_raw(path, raw);
}

void write_clicks_binary(const std::string& path, const ClickRecord& rec) {
    RawClicks raw;
    raw.duration_s = ms_to_seconds(rec.duration_ms);
    raw.t_s.resize(rec.t_ms.size());
    for (size_t i = 0; i < raw.t_s.size(); ++i) raw.t_s[i] = ms_to_seconds(rec.t_ms[i]);
    write_clicks_binary_raw(path, raw);
}

RawClicks read_clicks_raw(const std::string& path, std::optional<double> duration_s_override) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open click file: " + path);
    RawClicks raw;

    char head[4] = {};
    f.read(head, 4);
    if (f.gcount() == 4 && std::memcmp(head, kMagic, 4) == 0) {
        uint64_t n = 0;
        f.read(reinterpret_cast<char*>(&n), sizeof(n));
        if (!f) throw ParseError("truncated binary click file: " + path);
        raw.t_s.resize(n);
        f.read(reinterpret_cast<char*>(raw.t_s.data()),
               static_cast<std::streamsize>(n * sizeof(double)));
        if (static_cast<uint64_t>(f.gcount()) != n * sizeof(double))
            throw ParseError("truncated binary click file: " + path);
    } else {
        f.clear();
        f.seekg(0);
        std::string line;
        uint64_t lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.empty()) continue;
            double v = 0;
            auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
            if (ec != std::errc() || ptr != line.data() + line.size())
                throw ParseError(path + ":" + std::to_string(lineno) + ": not a timestamp");
            raw.t_s.push_back(v);
        }
    }

    if (duration_s_override) {
        raw.duration_s = *duration_s_override;
    } else {
        fs::path meta = path + ".meta.json";
        if (!fs::exists(meta))
            throw ParseError("duration unknown: no sidecar " + meta.string() +
                             " and no --duration-s given");
        json j = read_json_file(meta.string());
        if (!j.contains("duration_s"))
            throw ParseError("sidecar lacks duration_s: " + meta.string());
        raw.duration_s = j["duration_s"].get<double>();
    }

    // Parser validates monotonicity and range.
    double prev = -1;
    for (size_t i = 0; i < raw.t_s.size(); ++i) {
        double t = raw.t_s[i];
        if (!std::isfinite(t) || t < 0)
            throw ParseError(path + ": invalid timestamp at index " + std::to_string(i));
        if (t < prev)
            throw ParseError(path + ": timestamps not ascending at index " + std::to_string(i));
        prev = t;
    }
    if (!raw.t_s.empty() && raw.t_s.back() > raw.duration_s)
        throw ParseError(path + ": timestamp exceeds declared duration");
    return raw;
}

ClickRecord read_clicks(const std::string& path, std::optional<double> duration_s_override) {
    RawClicks raw = read_clicks_raw(path, duration_s_override);
    ClickRecord rec;
    rec.duration_ms = seconds_to_ms(raw.duration_s);
    rec.t_ms.resize(raw.t_s.size());
    for (size_t i = 0; i < raw.t_s.size(); ++i) rec.t_ms[i] = seconds_to_ms(raw.t_s[i]);
    // Guard against conversion pushing the last click past the duration.
    if (!rec.t_ms.empty() && rec.t_ms.back() > rec.duration_ms)
        rec.duration_ms = rec.t_ms.back();
    return rec;
}

void write_occupation(const std::string& path, const OccupationPath& p) {
    std::string out;
    bool bright = p.initial_bright;
    out += "0 " + std::string(bright ? "1" : "0") + "\n";
    for (double t : p.switch_times_ms) {
        bright = !bright;
        out += format_double(ms_to_seconds(t)) + (bright ? " 1" : " 0") + "\n";
    }
    write_text_file(path, out);
}

// --- spectra JSON ----------------------------------------------------------

static json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

static Eigen::MatrixXd matrix_from_json(const json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
    return m;
}

static json config_to_json(const EstimationConfig& c) {
    return json{{"frame_length_s", ms_to_seconds(c.frame_length_ms)},
                {"n_freq", c.n_freq},
                {"max_freq_khz", c.max_freq_khz},
                {"window", window_name(c.window)},
                {"window_sigma_rel", c.window_sigma_rel},
                {"orders", {c.orders[0], c.orders[1], c.orders[2], c.orders[3]}},
                {"resampling_count", c.resampling_count},
                {"batch_count", c.batch_count},
                {"seed", c.seed},
                {"unit_weights", c.unit_weights}};
}

static EstimationConfig config_from_json(const json& j) {
    EstimationConfig c;
    c.frame_length_ms = seconds_to_ms(j.at("frame_length_s").get<double>());
    c.n_freq = j.at("n_freq").get<int>();
    c.max_freq_khz = j.at("max_freq_khz").get<double>();
    std::string w = j.at("window").get<std::string>();
    c.window = w == "rectangular" ? WindowKind::Rectangular : WindowKind::ConfinedGaussian;
    c.window_sigma_rel = j.at("window_sigma_rel").get<double>();
    for (int i = 0; i < 4; ++i) c.orders[i] = j.at("orders")[i].get<bool>();
    c.resampling_count = j.at("resampling_count").get<int>();
    c.batch_count = j.at("batch_count").get<int>();
    c.seed = j.at("seed").get<uint64_t>();
    c.unit_weights = j.at("unit_weights").get<bool>();
    return c;
}

json spectra_to_json(const SpectraSet& s) {
    json j;
    j["format_version"] = kFormatVersion;
    j["tool_version"] = kToolVersion;
    j["kind"] = "spectra";
    j["rng"] = kRngName;
    j["config"] = config_to_json(s.config);
    j["axis_j"] = s.axis_j;
    j["stride"] = s.stride;
    j["comb_khz"] = s.comb_khz;
    j["freq_khz"] = s.freq_khz;
    j["window_norms"] = {s.norms.w1, s.norms.w2, s.norms.w3, s.norms.w4};
    j["n_frames"] = s.n_frames;
    j["n_clicks"] = s.n_clicks;
    j["duration_s"] = ms_to_seconds(s.duration_ms);
    j["alpha"] = s.alpha;
    j["sampled_source"] = s.sampled_source;
    if (s.has_order(1)) {
        j["s1"] = s.s1;
        j["s1_sigma"] = s.s1_sigma;
    }
    if (s.has_order(2)) {
        j["s2"] = s.s2;
        j["s2_sigma"] = s.s2_sigma;
    }
    if (s.has_order(3)) {
        j["s3_re"] = matrix_to_json(s.s3.real());
        j["s3_im"] = matrix_to_json(s.s3.imag());
        j["s3_sigma_re"] = matrix_to_json(s.s3_sigma_re);
        j["s3_sigma_im"] = matrix_to_json(s.s3_sigma_im);
    }
    if (s.has_order(4)) {
        j["s4"] = matrix_to_json(s.s4);
        j["s4_sigma"] = matrix_to_json(s.s4_sigma);
    }
    return j;
}

SpectraSet spectra_from_json(const json& j) {
    if (j.at("format_version").get<int>() != kFormatVersion)
        throw ParseError("spectra file format_version " +
                         j.at("format_version").dump() + " does not match tool version " +
                         std::to_string(kFormatVersion));
    SpectraSet s;
    s.config = config_from_json(j.at("config"));
    s.axis_j = j.at("axis_j").get<std::vector<int>>();
    s.stride = j.at("stride").get<int>();
    s.comb_khz = j.at("comb_khz").get<double>();
    s.freq_khz = j.at("freq_khz").get<std::vector<double>>();
    auto wn = j.at("window_norms");
    s.norms = {wn[0].get<double>(), wn[1].get<double>(), wn[2].get<double>(), wn[3].get<double>()};
    s.n_frames = j.at("n_frames").get<int>();
    s.n_clicks = j.at("n_clicks").get<uint64_t>();
    s.duration_ms = seconds_to_ms(j.at("duration_s").get<double>());
    s.alpha = j.at("alpha").get<double>();
    s.sampled_source = j.at("sampled_source").get<bool>();
    if (s.has_order(1)) {
        s.s1 = j.at("s1").get<double>();
        s.s1_sigma = j.at("s1_sigma").get<double>();
    }
    if (s.has_order(2)) {
        s.s2 = j.at("s2").get<std::vector<double>>();
        s.s2_sigma = j.at("s2_sigma").get<std::vector<double>>();
    }
    if (s.has_order(3)) {
        Eigen::MatrixXd re = matrix_from_json(j.at("s3_re"));
        Eigen::MatrixXd im = matrix_from_json(j.at("s3_im"));
        s.s3 = re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
        s.s3_sigma_re = matrix_from_json(j.at("s3_sigma_re"));
        s.s3_sigma_im = matrix_from_json(j.at("s3_sigma_im"));
    }
    if (s.has_order(4)) {
        s.s4 = matrix_from_json(j.at("s4"));
        s.s4_sigma = matrix_from_json(j.at("s4_sigma"));
    }
    return s;
}

void write_spectra(const std::string& path, const SpectraSet& s, const json& meta) {
    json j = spectra_to_json(s);
    j["meta"] = meta;
    write_text_file(path, j.dump(1));
}

SpectraSet read_spectra(const std::string& path) {
    return spectra_from_json(read_json_file(path));
}

SpectraSet model_spectra_as_set(const ModelSpectra& m) {
    SpectraSet s;
    const int n = m.grid.size();
    s.freq_khz = m.grid.values;
    s.axis_j.resize(n);
    // Arbitrary real grids have no comb; keep indices as positions.
    for (int i = 0; i < n; ++i) s.axis_j[i] = i;
    s.stride = 1;
    s.comb_khz = 0;
    s.s1 = m.s1;
    s.s2 = m.s2;
    s.s2_sigma.assign(n, 0.0);
    s.s3 = m.s3;
    s.s3_sigma_re = Eigen::MatrixXd::Zero(n, n);
    s.s3_sigma_im = Eigen::MatrixXd::Zero(n, n);
    s.s4 = m.s4;
    s.s4_sigma = Eigen::MatrixXd::Zero(n, n);
    s.n_frames = 0;
    return s;
}

json fit_to_json(const FitResult& r, const FitConfig& cfg) {
    json j;
    j["format_version"] = kFormatVersion;
    j["tool_version"] = kToolVersion;
    j["kind"] = "fit";
    j["config"] = {{"orders", {cfg.orders[0], cfg.orders[1], cfg.orders[2], cfg.orders[3]}},
                   {"gamma_det_fixed_khz", cfg.gamma_det_fixed},
                   {"max_evals", cfg.max_evals},
                   {"simplex_tol", cfg.simplex_tol},
                   {"n_subsets", cfg.n_subsets},
                   {"seed", cfg.seed}};
    j["gamma_in_khz"] = r.gamma_in;
    j["gamma_out_khz"] = r.gamma_out;
    j["beta_sq_khz"] = r.beta_sq;
    j["gamma_ph_khz"] = r.gamma_ph;
    if (r.has_sigma) {
        j["gamma_in_sigma_khz"] = r.gamma_in_sigma;
        j["gamma_out_sigma_khz"] = r.gamma_out_sigma;
        j["beta_sq_sigma_khz"] = r.beta_sq_sigma;
        j["gamma_ph_sigma_khz"] = r.gamma_ph_sigma;
    }
    j["objective"] = r.objective;
    j["n_points_used"] = r.n_points_used;
    j["n_points_excluded"] = r.n_points_excluded;
    j["converged"] = r.converged;
    j["budget_exhausted"] = r.budget_exhausted;
    j["evaluations"] = r.evaluations;
    j["best_start"] = r.best_start;
    json starts = json::array();
    for (const auto& s : r.starts)
        starts.push_back({{"gamma_in_khz", s.gamma_in},
                          {"gamma_out_khz", s.gamma_out},
                          {"beta_sq_khz", s.beta_sq},
                          {"objective", s.objective},
                          {"evaluations", s.evaluations},
                          {"converged", s.converged}});
    j["starts"] = starts;
    json subsets = json::array();
    for (const auto& s : r.subsets)
        subsets.push_back({{"seed", s.seed},
                           {"alpha", s.alpha},
                           {"gamma_in_khz", s.gamma_in},
                           {"gamma_out_khz", s.gamma_out},
                           {"beta_sq_khz", s.beta_sq},
                           {"gamma_ph_khz", s.gamma_ph},
                           {"objective", s.objective},
                           {"converged", s.converged},
                           {"failed", s.failed}});
    j["subsets"] = subsets;
    return j;
}

void write_fit(const std::string& path, const FitResult& r, const FitConfig& cfg,
               const json& meta) {
    json j = fit_to_json(r, cfg);
    j["meta"] = meta;
    write_text_file(path, j.dump(1));
}

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open: " + path);
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

static CMat cmat_from_json(const json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
    CMat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            m(r, c) = Complex(j[r][c][0].get<double>(), j[r][c][1].get<double>());
    return m;
}

static json cmat_to_json(const CMat& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c)
            row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

LindbladSystem system_from_json(const json& j) {
    LindbladSystem sys;
    sys.dim = j.at("dim").get<int>();
    for (const auto& jj : j.at("jumps")) {
        JumpTerm t;
        t.op = cmat_from_json(jj.at("matrix"));
        t.rate_khz = jj.at("rate_khz").get<double>();
        if (t.op.rows() != sys.dim || t.op.cols() != sys.dim)
            throw ParseError("jump matrix dimension mismatch");
        sys.jumps.push_back(std::move(t));
    }
    sys.measurement = cmat_from_json(j.at("measurement"));
    if (sys.measurement.rows() != sys.dim || sys.measurement.cols() != sys.dim)
        throw ParseError("measurement matrix dimension mismatch");
    sys.beta_sq = j.at("beta_sq").get<double>();
    return sys;
}

json system_to_json(const LindbladSystem& sys) {
    json jumps = json::array();
    for (const auto& t : sys.jumps)
        jumps.push_back({{"matrix", cmat_to_json(t.op)}, {"rate_khz", t.rate_khz}});
    return json{{"dim", sys.dim},
                {"jumps", jumps},
                {"measurement", cmat_to_json(sys.measurement)},
                {"beta_sq", sys.beta_sq}};
}

} // namespace pspec
