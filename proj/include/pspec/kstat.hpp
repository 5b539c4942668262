#pragma once

#include <complex>
#include <stdexcept>

// Multivariate k-statistics: unbiased estimators of joint cumulants from m
// i.i.d. samples, written in terms of raw product means. The order-2 case is
// the Bessel-corrected covariance m/(m-1)(mean(xy) - mean(x) mean(y)); orders
// 3 and 4 are the tensor generalizations of Fisher's k-statistics, with the
// fourth order carrying all pairwise product-moment corrections.

namespace pspec {
namespace kstat {

using Cx = std::complex<double>;

/// Raw means of one sample set and every product needed up to order 2.
inline Cx c2(double m, Cx mx, Cx my, Cx mxy) {
    if (m < 2) throw std::invalid_argument("c2 needs at least 2 samples");
    return m / (m - 1.0) * (mxy - mx * my);
}

inline Cx c3(double m, Cx mx, Cx my, Cx mz, Cx mxy, Cx mxz, Cx myz, Cx mxyz) {
    if (m < 3) throw std::invalid_argument("c3 needs at least 3 samples");
    Cx central = mxyz - mx * myz - my * mxz - mz * mxy + 2.0 * mx * my * mz;
    return m * m / ((m - 1.0) * (m - 2.0)) * central;
}

struct RawMeans4 {
    Cx x, y, z, w;                      // singles
    Cx xy, xz, xw, yz, yw, zw;          // pairs
    Cx xyz, xyw, xzw, yzw;              // triples
    Cx xyzw;                            // quadruple
};

inline Cx c4(double m, const RawMeans4& r) {
    if (m < 4) throw std::invalid_argument("c4 needs at least 4 samples");
    // Central product moments.
    Cx pxy = r.xy - r.x * r.y;
    Cx pxz = r.xz - r.x * r.z;
    Cx pxw = r.xw - r.x * r.w;
    Cx pyz = r.yz - r.y * r.z;
    Cx pyw = r.yw - r.y * r.w;
    Cx pzw = r.zw - r.z * r.w;
    Cx q = r.xyzw
         - r.x * r.yzw - r.y * r.xzw - r.z * r.xyw - r.w * r.xyz
         + r.x * r.y * r.zw + r.x * r.z * r.yw + r.x * r.w * r.yz
         + r.y * r.z * r.xw + r.y * r.w * r.xz + r.z * r.w * r.xy
         - 3.0 * r.x * r.y * r.z * r.w;
    Cx paired = pxy * pzw + pxz * pyw + pxw * pyz;
    return m * m / ((m - 1.0) * (m - 2.0) * (m - 3.0)) * ((m + 1.0) * q - (m - 1.0) * paired);
}

} // namespace kstat
} // namespace pspec
