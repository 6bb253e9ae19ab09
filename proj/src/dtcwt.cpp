#include "aia/dtcwt.hpp"

#include "aia/error.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace aia {

const DtcwtFilters& DtcwtFilters::standard() {
  static const DtcwtFilters filters = [] {
    DtcwtFilters f;
    // near_sym_b
    f.h0o = {-0.0017578125, 0.0, 0.022265625, -0.046875, -0.0482421875, 0.296875, 0.55546875,
             0.296875,      -0.0482421875, -0.046875, 0.022265625, 0.0, -0.0017578125};
    f.g1o = {-0.0017578125, -0.0, 0.022265625, 0.046875, -0.0482421875, -0.296875, 0.55546875,
             -0.296875,     -0.0482421875, 0.046875, 0.022265625, -0.0, -0.0017578125};
    f.g0o = {7.062639508928571e-05,  0.0,
             -0.0013419015066964285, -0.0018833705357142855,
             0.007156808035714285,   0.023856026785714284,
             -0.05564313616071428,   -0.05168805803571428,
             0.29975760323660716,    0.5594308035714286,
             0.29975760323660716,    -0.05168805803571428,
             -0.05564313616071428,   0.023856026785714284,
             0.007156808035714285,   -0.0018833705357142855,
             -0.0013419015066964285, 0.0,
             7.062639508928571e-05};
    f.h1o = {-7.062639508928571e-05, 0.0,
             0.0013419015066964285,  -0.0018833705357142855,
             -0.007156808035714285,  0.023856026785714284,
             0.05564313616071428,    -0.05168805803571428,
             -0.29975760323660716,   0.5594308035714286,
             -0.29975760323660716,   -0.05168805803571428,
             0.05564313616071428,    0.023856026785714284,
             -0.007156808035714285,  -0.0018833705357142855,
             0.0013419015066964285,  0.0,
             -7.062639508928571e-05};
    // qshift_b
    f.h0a = {0.003253142763653182, -0.00388321199915849, 0.03466034684485349, -0.03887280126882779,
             -0.11720388769911527, 0.27529538466888204,  0.7561456438925225,  0.5688104207121227,
             0.011866092033797,    -0.1067118046866654,  0.023825384794920298, 0.01702522388155399,
             -0.005439475937274115, -0.004556895628475491};
    f.h0b = {-0.004556895628475491, -0.005439475937274115, 0.01702522388155399, 0.023825384794920298,
             -0.1067118046866654,   0.011866092033797,     0.5688104207121227,  0.7561456438925225,
             0.27529538466888204,   -0.11720388769911527,  -0.03887280126882779, 0.03466034684485349,
             -0.00388321199915849,  0.003253142763653182};
    f.h1a = {-0.004556895628475491, 0.005439475937274115, 0.01702522388155399, -0.023825384794920298,
             -0.1067118046866654,   -0.011866092033797,   0.5688104207121227,  -0.7561456438925225,
             0.27529538466888204,   0.11720388769911527,  -0.03887280126882779, -0.03466034684485349,
             -0.00388321199915849,  -0.003253142763653182};
    f.h1b = {-0.003253142763653182, -0.00388321199915849, -0.03466034684485349, -0.03887280126882779,
             0.11720388769911527,   0.27529538466888204,  -0.7561456438925225,  0.5688104207121227,
             -0.011866092033797,    -0.1067118046866654,  -0.023825384794920298, 0.01702522388155399,
             0.005439475937274115,  -0.004556895628475491};
    f.g0a = f.h0b;
    f.g0b = f.h0a;
    f.g1a = f.h1b;
    f.g1b = f.h1a;
    return f;
  }();
  return filters;
}

namespace {

using Eigen::MatrixXd;

// Symmetric extension with repeated end samples: ... 1 0 | 0 1 ... r-1 | r-1 r-2 ...
int reflect(long x, long n) {
  const long period = 2 * n;
  long y = x % period;
  if (y < 0) y += period;
  return static_cast<int>(y < n ? y : period - 1 - y);
}

// out[k] = sum_i h[i] * X.row(rows[k + m - 1 - i]), written to Y.row(first + k * step).
void convolve_rows(const MatrixXd& x, const std::vector<int>& rows, const std::vector<double>& h, MatrixXd& y,
                   Eigen::Index first, Eigen::Index step, bool accumulate = false) {
  const auto m = static_cast<long>(h.size());
  const long out_len = static_cast<long>(rows.size()) - m + 1;
  for (long k = 0; k < out_len; ++k) {
    auto dst = y.row(first + k * step);
    if (!accumulate) dst.setZero();
    for (long i = 0; i < m; ++i) {
      if (h[static_cast<std::size_t>(i)] == 0.0) continue;
      dst += h[static_cast<std::size_t>(i)] * x.row(rows[static_cast<std::size_t>(k + m - 1 - i)]);
    }
  }
}

std::vector<double> taps(const std::vector<double>& h, std::size_t start) {
  std::vector<double> out;
  for (std::size_t i = start; i < h.size(); i += 2) out.push_back(h[i]);
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Undecimated column filtering with an odd-length filter.
MatrixXd colfilter(const MatrixXd& x, const std::vector<double>& h) {
  const long r = x.rows();
  const long m2 = static_cast<long>(h.size()) / 2;
  std::vector<int> xe;
  for (long i = -m2; i < r + m2; ++i) xe.push_back(reflect(i, r));
  MatrixXd y(r, x.cols());
  convolve_rows(x, xe, h, y, 0, 1);
  return y;
}

// Decimating quarter-shift column filtering; ha on odd samples, hb on even.
MatrixXd coldfilt(const MatrixXd& x, const std::vector<double>& ha, const std::vector<double>& hb) {
  const long r = x.rows();
  const long m = static_cast<long>(ha.size());
  if (r % 4 != 0) throw DimensionError("coldfilt: rows must be a multiple of 4");
  if (ha.size() != hb.size() || m % 2 != 0) throw DimensionError("coldfilt: filters must have equal even length");

  std::vector<int> xe;
  for (long i = -m; i < r + m; ++i) xe.push_back(reflect(i, r));
  const auto hao = taps(ha, 0), hae = taps(ha, 1), hbo = taps(hb, 0), hbe = taps(hb, 1);

  std::vector<int> t1, t3, t0, t2;
  for (long t = 5; t < r + 2 * m - 2; t += 4) {
    t1.push_back(xe[static_cast<std::size_t>(t - 1)]);
    t3.push_back(xe[static_cast<std::size_t>(t - 3)]);
    t0.push_back(xe[static_cast<std::size_t>(t)]);
    t2.push_back(xe[static_cast<std::size_t>(t - 2)]);
  }
  const long r2 = r / 2;
  MatrixXd y(r2, x.cols());
  const bool same_sign = dot(ha, hb) > 0;
  const Eigen::Index s1 = same_sign ? 0 : 1;
  const Eigen::Index s2 = same_sign ? 1 : 0;
  convolve_rows(x, t1, hao, y, s1, 2);
  convolve_rows(x, t3, hae, y, s1, 2, true);
  convolve_rows(x, t0, hbo, y, s2, 2);
  convolve_rows(x, t2, hbe, y, s2, 2, true);
  return y;
}

// Interpolating quarter-shift column filtering, the synthesis dual of coldfilt.
MatrixXd colifilt(const MatrixXd& x, const std::vector<double>& ha, const std::vector<double>& hb) {
  const long r = x.rows();
  const long m = static_cast<long>(ha.size());
  if (r % 2 != 0) throw DimensionError("colifilt: rows must be even");
  if (ha.size() != hb.size() || m % 2 != 0) throw DimensionError("colifilt: filters must have equal even length");

  MatrixXd y = MatrixXd::Zero(2 * r, x.cols());
  if (x.isZero(0.0)) return y;

  const long m2 = m / 2;
  std::vector<int> xe;
  for (long i = -m2; i < r + m2; ++i) xe.push_back(reflect(i, r));
  const auto hao = taps(ha, 0), hae = taps(ha, 1), hbo = taps(hb, 0), hbe = taps(hb, 1);
  const bool same_sign = dot(ha, hb) > 0;

  auto gather = [&](long t_start, long t_end, long shift) {
    std::vector<int> out;
    for (long t = t_start; t < t_end; t += 2) out.push_back(xe[static_cast<std::size_t>(t + shift)]);
    return out;
  };

  if (m2 % 2 == 0) {
    const long ta_shift = same_sign ? 0 : -1;
    const long tb_shift = same_sign ? -1 : 0;
    convolve_rows(x, gather(3, r + m, tb_shift - 2), hae, y, 0, 4);
    convolve_rows(x, gather(3, r + m, ta_shift - 2), hbe, y, 1, 4);
    convolve_rows(x, gather(3, r + m, tb_shift), hao, y, 2, 4);
    convolve_rows(x, gather(3, r + m, ta_shift), hbo, y, 3, 4);
  } else {
    const long ta_shift = same_sign ? 0 : -1;
    const long tb_shift = same_sign ? -1 : 0;
    convolve_rows(x, gather(2, r + m - 1, tb_shift), hao, y, 0, 4);
    convolve_rows(x, gather(2, r + m - 1, ta_shift), hbo, y, 1, 4);
    convolve_rows(x, gather(2, r + m - 1, tb_shift), hae, y, 2, 4);
    convolve_rows(x, gather(2, r + m - 1, ta_shift), hbe, y, 3, 4);
  }
  return y;
}

// Quads [a b; c d] -> two complex subbands (p - q, p + q), p = (a + jb)/sqrt2, q = (d - jc)/sqrt2.
std::array<ComplexMatrix, 2> q2c(const MatrixXd& y) {
  const Eigen::Index rows = y.rows() / 2, cols = y.cols() / 2;
  const double s = std::sqrt(0.5);
  ComplexMatrix z1(rows, cols), z2(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const std::complex<double> p(s * y(2 * r, 2 * c), s * y(2 * r, 2 * c + 1));
      const std::complex<double> q(s * y(2 * r + 1, 2 * c + 1), -s * y(2 * r + 1, 2 * c));
      z1(r, c) = p - q;
      z2(r, c) = p + q;
    }
  }
  return {z1, z2};
}

MatrixXd c2q(const ComplexMatrix& w1, const ComplexMatrix& w2) {
  if (w1.rows() != w2.rows() || w1.cols() != w2.cols()) throw DimensionError("c2q: subband pair shape mismatch");
  const double s = std::sqrt(0.5);
  MatrixXd x(2 * w1.rows(), 2 * w1.cols());
  for (Eigen::Index r = 0; r < w1.rows(); ++r) {
    for (Eigen::Index c = 0; c < w1.cols(); ++c) {
      const std::complex<double> p = s * (w1(r, c) + w2(r, c));
      const std::complex<double> q = s * (w1(r, c) - w2(r, c));
      x(2 * r, 2 * c) = p.real();
      x(2 * r, 2 * c + 1) = p.imag();
      x(2 * r + 1, 2 * c) = q.imag();
      x(2 * r + 1, 2 * c + 1) = -q.real();
    }
  }
  return x;
}

void assign_pair(HighpassLevel& level, int first, int second, const MatrixXd& quads) {
  auto [a, b] = q2c(quads);
  level.bands[static_cast<std::size_t>(first)] = std::move(a);
  level.bands[static_cast<std::size_t>(second)] = std::move(b);
}

}  // namespace

std::vector<Eigen::MatrixXd> SubbandSet::final_level_matrices() const {
  if (highpasses.empty()) throw DimensionError("subband set has no levels");
  std::vector<Eigen::MatrixXd> out;
  out.reserve(16);
  for (const auto& lp : lowpass) {
    out.push_back(lp.real());
    out.push_back(lp.imag());
  }
  for (const auto& band : highpasses.back().bands) {
    out.push_back(band.real());
    out.push_back(band.imag());
  }
  return out;
}

SubbandSet dtcwt_forward(const Eigen::MatrixXd& image, int levels, const DtcwtFilters& f) {
  if (levels < 1) throw DimensionError("dtcwt_forward: need at least one level");
  const long block = 1L << levels;
  if (image.rows() == 0 || image.cols() == 0 || image.rows() % block != 0 || image.cols() % block != 0) {
    throw DimensionError("dtcwt_forward: " + std::to_string(image.rows()) + "x" + std::to_string(image.cols()) +
                         " is not divisible by 2^" + std::to_string(levels));
  }

  SubbandSet out;
  out.rows = static_cast<int>(image.rows());
  out.cols = static_cast<int>(image.cols());
  out.highpasses.resize(static_cast<std::size_t>(levels));

  MatrixXd lo = colfilter(image, f.h0o).transpose();
  MatrixXd hi = colfilter(image, f.h1o).transpose();
  MatrixXd lolo = colfilter(lo, f.h0o).transpose();
  assign_pair(out.highpasses[0], 0, 5, colfilter(hi, f.h0o).transpose());
  assign_pair(out.highpasses[0], 2, 3, colfilter(lo, f.h1o).transpose());
  assign_pair(out.highpasses[0], 1, 4, colfilter(hi, f.h1o).transpose());

  for (int level = 1; level < levels; ++level) {
    lo = coldfilt(lolo, f.h0b, f.h0a).transpose();
    hi = coldfilt(lolo, f.h1b, f.h1a).transpose();
    lolo = coldfilt(lo, f.h0b, f.h0a).transpose();
    auto& hp = out.highpasses[static_cast<std::size_t>(level)];
    assign_pair(hp, 0, 5, coldfilt(hi, f.h0b, f.h0a).transpose());
    assign_pair(hp, 2, 3, coldfilt(lo, f.h1b, f.h1a).transpose());
    assign_pair(hp, 1, 4, coldfilt(hi, f.h1b, f.h1a).transpose());
  }
  out.lowpass = q2c(lolo);
  return out;
}

Eigen::MatrixXd dtcwt_inverse(const SubbandSet& s, const DtcwtFilters& f) {
  const int levels = s.levels();
  if (levels < 1) throw DimensionError("dtcwt_inverse: no levels");
  for (int level = 0; level < levels; ++level) {
    const long expect_r = s.rows >> (level + 1), expect_c = s.cols >> (level + 1);
    for (const auto& band : s.highpasses[static_cast<std::size_t>(level)].bands) {
      if (band.rows() != expect_r || band.cols() != expect_c) {
        throw DimensionError("dtcwt_inverse: level " + std::to_string(level + 1) + " subband has shape " +
                             std::to_string(band.rows()) + "x" + std::to_string(band.cols()) + ", expected " +
                             std::to_string(expect_r) + "x" + std::to_string(expect_c));
      }
    }
  }
  const long low_r = s.rows >> levels, low_c = s.cols >> levels;
  for (const auto& lp : s.lowpass) {
    if (lp.rows() != low_r || lp.cols() != low_c) throw DimensionError("dtcwt_inverse: lowpass shape mismatch");
  }

  MatrixXd z = c2q(s.lowpass[0], s.lowpass[1]);
  for (int level = levels - 1; level >= 1; --level) {
    const auto& b = s.highpasses[static_cast<std::size_t>(level)].bands;
    const MatrixXd lh = c2q(b[0], b[5]);
    const MatrixXd hl = c2q(b[2], b[3]);
    const MatrixXd hh = c2q(b[1], b[4]);
    const MatrixXd y1 = colifilt(z, f.g0b, f.g0a) + colifilt(lh, f.g1b, f.g1a);
    const MatrixXd y2 = colifilt(hl, f.g0b, f.g0a) + colifilt(hh, f.g1b, f.g1a);
    z = (colifilt(y1.transpose(), f.g0b, f.g0a) + colifilt(y2.transpose(), f.g1b, f.g1a)).transpose();
  }
  const auto& b = s.highpasses[0].bands;
  const MatrixXd lh = c2q(b[0], b[5]);
  const MatrixXd hl = c2q(b[2], b[3]);
  const MatrixXd hh = c2q(b[1], b[4]);
  const MatrixXd y1 = colfilter(z, f.g0o) + colfilter(lh, f.g1o);
  const MatrixXd y2 = colfilter(hl, f.g0o) + colfilter(hh, f.g1o);
  return (colfilter(y1.transpose(), f.g0o) + colfilter(y2.transpose(), f.g1o)).transpose();
}

}  // namespace aia
