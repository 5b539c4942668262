#pragma once

#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "pspec/estimator.hpp"
#include "pspec/fit.hpp"
#include "pspec/model.hpp"
#include "pspec/sim.hpp"
#include "pspec/spectra_model.hpp"

// File formats. Times in files are seconds and rates kHz; conversion to the
// internal millisecond convention happens here.
//
//   clicks (text):   one ascending timestamp in seconds per line
//   clicks (binary): magic "PSK1", little-endian u64 count, count f64 values
//   spectra/fit/model definition: JSON with format_version and a full config
//   echo; every CLI output gets a "<path>.meta.json" sidecar.

namespace pspec {

using json = nlohmann::json;

/// Shortest string that round-trips the double exactly.
std::string format_double(double v);

/// Click payload exactly as stored (seconds), for operations that must keep
/// file bytes intact, like thinning.
struct RawClicks {
    std::vector<double> t_s;
    double duration_s = 0;
};

RawClicks read_clicks_raw(const std::string& path,
                          std::optional<double> duration_s_override = std::nullopt);
void write_clicks_text_raw(const std::string& path, const RawClicks& raw);
void write_clicks_binary_raw(const std::string& path, const RawClicks& raw);

void write_clicks_text(const std::string& path, const ClickRecord& rec);
void write_clicks_binary(const std::string& path, const ClickRecord& rec);

/// Reads either format (binary when the PSK1 magic is present). Duration, not
/// stored in the payload, comes from the sidecar unless given explicitly.
ClickRecord read_clicks(const std::string& path,
                        std::optional<double> duration_s_override = std::nullopt);

void write_occupation(const std::string& path, const OccupationPath& path_data);

json spectra_to_json(const SpectraSet& s);
SpectraSet spectra_from_json(const json& j);
void write_spectra(const std::string& path, const SpectraSet& s, const json& meta);
SpectraSet read_spectra(const std::string& path);

/// Model spectra reuse the spectra schema (sigma arrays all zero) so they can
/// be overlaid and plotted by the same tools.
SpectraSet model_spectra_as_set(const ModelSpectra& m);

json fit_to_json(const FitResult& r, const FitConfig& cfg);
void write_fit(const std::string& path, const FitResult& r, const FitConfig& cfg,
               const json& meta);
json read_json_file(const std::string& path);

/// Lindblad system definition file: dim, jumps [{matrix, rate_khz}],
/// measurement matrix, beta_sq. Matrices are [re, im] pair grids.
LindbladSystem system_from_json(const json& j);
json system_to_json(const LindbladSystem& sys);

void write_text_file(const std::string& path, const std::string& content);

/// Refuses to overwrite unless force; creates parent directories.
void check_output_path(const std::string& path, bool force);

} // namespace pspec
