#pragma once

// Small dense linear algebra, Pauli algebra, discrete Fourier transforms and
// regression helpers shared by the physics modules.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace bornlab {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Matrix2 = Eigen::Matrix2cd;

namespace numerics {

inline constexpr std::size_t kMaxExpmDim = 8192;

/// Path taken by expm_apply; exposed so tests can pin which branch ran.
enum class ExpmPath { Hermitian, NormalSchur, ScalingSquaring };

struct ExpmOptions {
  /// ||H H^+ - H^+ H||_max <= normality_tol * ||H||_max^2 selects the spectral path.
  double normality_tol = 1e-12;
  /// Largest tolerated strictly-upper Schur entry relative to ||H||_max.
  double schur_offdiag_tol = 1e-10;
  /// Force the series path regardless of normality.
  bool force_series = false;
};

/// exp(-i H t) v. Hermitian and normal generators are diagonalised; anything
/// else (or a failed decomposition) goes through scaling-and-squaring.
ComplexVector expm_apply(const ComplexMatrix& H, double t, const ComplexVector& v,
                         const ExpmOptions& options = {}, ExpmPath* path_taken = nullptr);

/// Dense exp(-i H t) by scaling-and-squaring of the Taylor series.
ComplexMatrix expm_series(const ComplexMatrix& H, double t);

/// sigma^0 = 1, sigma^1..3 = Pauli x, y, z.
const Matrix2& pauli(int mu);

struct PauliCoefficients {
  std::array<double, 4> c{};
  double operator[](int mu) const { return c[static_cast<std::size_t>(mu)]; }
};

/// Real coefficients c_nu = tr(sigma^nu M) / 2 of a Hermitian 2x2 matrix.
/// Throws PreconditionError if ||M - M^+||_max exceeds `hermiticity_tol`.
PauliCoefficients pauli_expand(const Matrix2& M, double hermiticity_tol = 1e-10);

Matrix2 pauli_reconstruct(const PauliCoefficients& coeffs);

double max_abs(const Matrix2& M);

/// Unitary DFT, X_k = N^{-1/2} sum_n x_n exp(-2 pi i k n / N).
std::vector<cplx> dft(std::span<const cplx> v);
std::vector<cplx> idft(std::span<const cplx> v);

/// Unitary 3D DFT over an L^3 array (row-major, last index fastest) holding
/// `components` interleaved values per site.
std::vector<cplx> dft3(std::span<const cplx> v, std::size_t L, std::size_t components, bool inverse);

double norm2(std::span<const cplx> v);

/// Least-squares slope of ys against xs.
double fit_linear_slope(std::span<const double> xs, std::span<const double> ys);

/// Least-squares slope of log(ys) against log(xs). xs strictly monotone, all values > 0.
double fit_loglog_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace numerics
}  // namespace bornlab
