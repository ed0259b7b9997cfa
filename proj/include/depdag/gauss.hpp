#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "depdag/rng.hpp"

namespace depdag {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kTwoPi = 6.28318530717958647693;

inline double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / kSqrt2Pi;
}

inline double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

// P(X > x); accurate deep into the upper tail.
inline double std_normal_upper(double x) {
  return 0.5 * std::erfc(x * kInvSqrt2);
}

/// Inverse standard normal CDF (Wichura's algorithm AS 241, PPND16).
inline double std_normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("std_normal_quantile: u must lie in (0,1)");
  }
  const double q = u - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = (q < 0.0) ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        ((((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
               1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
             1.4875361290850614353e-2) * r + 1.36929880922735805310e-1) * r +
           5.99832206555887937690e-1) * r + 1.0));
  }
  return (q < 0.0) ? -x : x;
}

namespace detail {

// Gauss-Legendre half tables (positive nodes) for 6-, 12- and 20-point rules.
inline constexpr double kGlX6[3] = {0.9324695142031520, 0.6612093864662645,
                                    0.2386191860831969};
inline constexpr double kGlW6[3] = {0.1713244923791697, 0.3607615730481389,
                                    0.4679139345726914};
inline constexpr double kGlX12[6] = {0.9815606342467192, 0.9041172563704748,
                                     0.7699026741943047, 0.5873179542866175,
                                     0.3678314989981802, 0.1252334085114689};
inline constexpr double kGlW12[6] = {0.0471753363865120, 0.1069393259953189,
                                     0.1600783285433461, 0.2031674267230656,
                                     0.2334925365383546, 0.2491470458134027};
inline constexpr double kGlX20[10] = {0.9931285991850949, 0.9639719272779138,
                                      0.9122344282513258, 0.8391169718222188,
                                      0.7463319064601508, 0.6360536807265150,
                                      0.5108670019508271, 0.3737060887154195,
                                      0.2277858511416451, 0.0765265211334973};
inline constexpr double kGlW20[10] = {0.0176140071391521, 0.0406014298003862,
                                      0.0626720483341091, 0.0832767415767047,
                                      0.1019301198172403, 0.1181945319615182,
                                      0.1316886384491765, 0.1420961093183819,
                                      0.1491729864726037, 0.1527533871307258};

// Upper-orthant probability P(X > h, Y > k) for standard bivariate normal
// with correlation r. Genz's rework of the Drezner-Wesolowsky single
// integral: direct Gauss-Legendre in asin(r) for |r| <= 0.925, and the
// transformed tail integral above that.
inline double bvn_upper(double h, double k, double r) {
  const double* gx;
  const double* gw;
  int ng;
  const double ar = std::fabs(r);
  if (ar < 0.3) {
    gx = kGlX6; gw = kGlW6; ng = 3;
  } else if (ar < 0.75) {
    gx = kGlX12; gw = kGlW12; ng = 6;
  } else {
    gx = kGlX20; gw = kGlW20; ng = 10;
  }

  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    if (ar > 0.0) {
      const double hs = 0.5 * (h * h + k * k);
      const double asr = std::asin(r);
      for (int i = 0; i < ng; ++i) {
        for (int sgn = -1; sgn <= 1; sgn += 2) {
          const double sn = std::sin(0.5 * asr * (sgn * gx[i] + 1.0));
          bvn += gw[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
      }
      bvn = bvn * asr / (2.0 * kTwoPi);
    }
    return bvn + std_normal_upper(h) * std_normal_upper(k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (ar < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -0.5 * (bs / as + hk);
    if (asr > -100.0) {
      bvn = a * std::exp(asr) *
            (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 +
             c * d * as * as / 5.0);
    }
    if (-hk < 100.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-0.5 * hk) * kSqrt2Pi * std_normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a *= 0.5;
    for (int i = 0; i < ng; ++i) {
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        const double xs0 = a * (sgn * gx[i] + 1.0);
        const double xs = xs0 * xs0;
        const double rs = std::sqrt(1.0 - xs);
        asr = -0.5 * (bs / xs + hk);
        if (asr > -100.0) {
          bvn += a * gw[i] * std::exp(asr) *
                 (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                  (1.0 + c * xs * (1.0 + d * xs)));
        }
      }
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) {
    return bvn + std_normal_upper(std::max(h, k));
  }
  bvn = -bvn;
  if (k > h) {
    bvn += std_normal_cdf(k) - std_normal_cdf(h);
  }
  return bvn;
}

}  // namespace detail

/// P(U <= a, V <= b) for a standard bivariate normal with correlation rho.
inline double bvn_cdf(double a, double b, double rho) {
  if (!(std::fabs(rho) < 1.0)) {
    throw std::invalid_argument("bvn_cdf: |rho| must be < 1");
  }
  const double v = detail::bvn_upper(-a, -b, rho);
  return std::min(1.0, std::max(0.0, v));
}

/// Probability of one observed binary pair (x_a, x_b) given thresholds
/// (t_a, t_b) on the latent errors and correlation rho:
/// x = 1 means the error exceeded its threshold, x = 0 means it did not.
inline double quadrant_prob(int xa, int xb, double ta, double tb, double rho) {
  if (!(std::fabs(rho) < 1.0)) {
    throw std::invalid_argument("quadrant_prob: |rho| must be < 1");
  }
  const double ua = std_normal_upper(ta);
  const double ub = std_normal_upper(tb);
  const double uu = detail::bvn_upper(ta, tb, rho);
  double p;
  if (xa == 1 && xb == 1) {
    p = uu;
  } else if (xa == 1 && xb == 0) {
    p = ua - uu;
  } else if (xa == 0 && xb == 1) {
    p = ub - uu;
  } else {
    p = 1.0 - ua - ub + uu;
  }
  return std::min(1.0, std::max(0.0, p));
}

enum class TruncSide { greater, less_eq };

namespace detail {

// Draw from N(0,1) restricted to (alpha, inf). Inverse CDF through the
// upper tail below the 5-sd switch, Robert's shifted-exponential rejection
// beyond it; stable for alpha up to ~30.
inline double sample_std_truncated_above(double alpha, Rng& rng) {
  if (alpha <= 5.0) {
    const double tail = std_normal_upper(alpha);
    return -std_normal_quantile(rng.uniform() * tail);
  }
  const double lam = 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0));
  for (;;) {
    const double x = alpha - std::log(rng.uniform()) / lam;
    const double d = x - lam;
    if (std::log(rng.uniform()) <= -0.5 * d * d) {
      return x;
    }
  }
}

}  // namespace detail

/// One draw from N(mean, sd^2) restricted to (threshold, inf) when
/// side == greater, or to (-inf, threshold] when side == less_eq.
inline double sample_truncated_normal(double mean, double sd, TruncSide side,
                                      double threshold, Rng& rng) {
  if (!(sd > 0.0)) {
    throw std::invalid_argument("sample_truncated_normal: sd must be > 0");
  }
  const double alpha = (threshold - mean) / sd;
  if (side == TruncSide::greater) {
    return mean + sd * detail::sample_std_truncated_above(alpha, rng);
  }
  return mean - sd * detail::sample_std_truncated_above(-alpha, rng);
}

inline double standard_normal(Rng& rng) {
  return std_normal_quantile(rng.uniform());
}

// Mean of N(0,1) restricted to (t, inf) / (-inf, t]; closed forms used when
// the error covariance is the identity and Gibbs sampling is unnecessary.
inline double truncated_normal_mean_above(double t) {
  const double tail = std_normal_upper(t);
  if (tail <= 0.0) {
    return t;  // beyond double range; the mass sits at the boundary
  }
  return std_normal_pdf(t) / tail;
}

inline double truncated_normal_mean_below(double t) {
  const double lower = std_normal_cdf(t);
  if (lower <= 0.0) {
    return t;
  }
  return -std_normal_pdf(t) / lower;
}

struct EigenDecomposition {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // orthonormal columns, aligned with values
};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
inline EigenDecomposition symmetric_eigen(const Eigen::MatrixXd& input) {
  const Eigen::Index n = input.rows();
  if (input.cols() != n) {
    throw std::invalid_argument("symmetric_eigen: matrix must be square");
  }
  const double scale = std::max(1.0, input.cwiseAbs().maxCoeff());
  if ((input - input.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("symmetric_eigen: matrix must be symmetric");
  }

  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double frob = std::max(a.norm(), 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        off += 2.0 * a(p, q) * a(p, q);
      }
    }
    if (std::sqrt(off) <= 1e-14 * frob) {
      break;
    }
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= 1e-300) {
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&a](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

}  // namespace depdag
