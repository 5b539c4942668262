#pragma once

#include <cstdint>
#include <vector>

namespace pspec {

/// Ordered photon-arrival timestamps plus total record duration.
/// Times are milliseconds internally; file formats use seconds.
struct ClickRecord {
    std::vector<double> t_ms;
    double duration_ms = 0;

    uint64_t size() const { return t_ms.size(); }
    /// Mean click rate in kHz (clicks per millisecond).
    double mean_rate_khz() const { return duration_ms > 0 ? size() / duration_ms : 0.0; }
    /// Throws unless 0 <= t_1 <= ... <= t_M <= duration and all finite.
    void validate() const;
};

} // namespace pspec
