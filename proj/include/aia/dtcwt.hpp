#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

namespace aia {

using ComplexMatrix = Eigen::MatrixXcd;

/// Analysis/synthesis filters of a two-stage dual-tree bank.
struct DtcwtFilters {
  // Level 1, odd-length near-symmetric biorthogonal pair.
  std::vector<double> h0o, h1o, g0o, g1o;
  // Levels >= 2, even-length quarter-shift pair (tree a and tree b).
  std::vector<double> h0a, h0b, h1a, h1b, g0a, g0b, g1a, g1b;

  /// Kingsbury near_sym_b (13/19 taps) with qshift_b (14 taps).
  static const DtcwtFilters& standard();
};

/// One decomposition level: six oriented complex subbands
/// (approximately 15, 45, 75, 105, 135, 165 degrees).
struct HighpassLevel {
  std::array<ComplexMatrix, 6> bands;
};

class SubbandSet {
 public:
  std::vector<HighpassLevel> highpasses;  // index 0 is level 1 (finest)
  std::array<ComplexMatrix, 2> lowpass;   // both trees' final-level lowpass, as complex pairs
  int rows = 0;                           // input size
  int cols = 0;

  int levels() const { return static_cast<int>(highpasses.size()); }

  /// The 16 real matrices of the final level: lowpass 1 (re, im), lowpass 2 (re, im),
  /// then highpass orientation 1..6 (re, im). Each is rows/2^n x cols/2^n.
  std::vector<Eigen::MatrixXd> final_level_matrices() const;
};

/// Forward 2-D dual-tree complex wavelet transform. rows and cols must be divisible by 2^levels.
SubbandSet dtcwt_forward(const Eigen::MatrixXd& image, int levels,
                         const DtcwtFilters& filters = DtcwtFilters::standard());

/// Inverse transform. Throws DimensionError if the subband shapes are inconsistent.
Eigen::MatrixXd dtcwt_inverse(const SubbandSet& subbands, const DtcwtFilters& filters = DtcwtFilters::standard());

}  // namespace aia
