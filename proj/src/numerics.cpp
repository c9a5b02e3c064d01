#include "bornlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

#include <fftw3.h>

#include "bornlab/error.hpp"

namespace bornlab::numerics {

namespace {

constexpr cplx kI{0.0, 1.0};

double max_abs_entry(const ComplexMatrix& M) {
  return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

ComplexVector apply_diagonal_phases(const ComplexMatrix& U, const ComplexVector& eigenvalues,
                                    double t, const ComplexVector& v) {
  ComplexVector coeffs = U.adjoint() * v;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
    coeffs[k] *= std::exp(-kI * eigenvalues[k] * t);
  }
  return U * coeffs;
}

// FFTW's planner is not reentrant; execution of a finished plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftwPlan {
 public:
  FftwPlan(int rank, const int* dims, int howmany, cplx* in, cplx* out, int sign) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_many_dft(rank, dims, howmany, reinterpret_cast<fftw_complex*>(in), nullptr,
                               howmany, 1, reinterpret_cast<fftw_complex*>(out), nullptr, howmany,
                               1, sign, FFTW_ESTIMATE);
    if (plan_ == nullptr) throw Error("FFTW failed to create a plan");
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  ~FftwPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_ = nullptr;
};

std::vector<cplx> transform(std::span<const cplx> v, std::span<const int> dims, int howmany,
                            int sign) {
  std::vector<cplx> in(v.begin(), v.end());
  std::vector<cplx> out(v.size());
  {
    FftwPlan plan(static_cast<int>(dims.size()), dims.data(), howmany, in.data(), out.data(), sign);
    plan.execute();
  }
  std::size_t points = 1;
  for (int d : dims) points *= static_cast<std::size_t>(d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(points));
  for (auto& x : out) x *= scale;
  return out;
}

void check_regression_input(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw PreconditionError("slope fit: xs and ys differ in length");
  if (xs.size() < 2) throw PreconditionError("slope fit: at least 2 points required");
  const bool increasing = xs[1] > xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (increasing ? !(xs[i] > xs[i - 1]) : !(xs[i] < xs[i - 1])) {
      throw PreconditionError("slope fit: xs must be strictly monotone");
    }
  }
}

}  // namespace

ComplexMatrix expm_series(const ComplexMatrix& H, double t) {
  const Eigen::Index n = H.rows();
  ComplexMatrix A = -kI * t * H;
  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  A /= std::ldexp(1.0, squarings);

  ComplexMatrix result = ComplexMatrix::Identity(n, n);
  ComplexMatrix term = ComplexMatrix::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = (term * A) / static_cast<double>(k);
    result += term;
    if (max_abs_entry(term) <= 1e-18 * max_abs_entry(result)) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

ComplexVector expm_apply(const ComplexMatrix& H, double t, const ComplexVector& v,
                         const ExpmOptions& options, ExpmPath* path_taken) {
  if (H.rows() != H.cols()) throw PreconditionError("expm_apply: matrix is not square");
  if (H.rows() < 1) throw PreconditionError("expm_apply: empty matrix");
  if (H.rows() != v.size()) {
    throw PreconditionError("expm_apply: dimension mismatch (matrix " + std::to_string(H.rows()) +
                            ", vector " + std::to_string(v.size()) + ")");
  }
  if (static_cast<std::size_t>(H.rows()) > kMaxExpmDim) {
    throw PreconditionError("expm_apply: dimension exceeds " + std::to_string(kMaxExpmDim));
  }

  auto report = [&](ExpmPath p) {
    if (path_taken != nullptr) *path_taken = p;
  };

  const double scale = max_abs_entry(H);
  if (!options.force_series) {
    const double hermiticity = max_abs_entry(H - H.adjoint());
    if (hermiticity <= options.normality_tol * std::max(scale, 1.0)) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(H);
      if (solver.info() == Eigen::Success) {
        report(ExpmPath::Hermitian);
        return apply_diagonal_phases(solver.eigenvectors(),
                                     solver.eigenvalues().cast<cplx>(), t, v);
      }
    }
    const double commutator = max_abs_entry(H * H.adjoint() - H.adjoint() * H);
    if (commutator <= options.normality_tol * std::max(scale * scale, 1.0)) {
      Eigen::ComplexSchur<ComplexMatrix> schur(H);
      if (schur.info() == Eigen::Success) {
        const ComplexMatrix& T = schur.matrixT();
        const ComplexMatrix upper = T.triangularView<Eigen::StrictlyUpper>();
        if (max_abs_entry(upper) <= options.schur_offdiag_tol * std::max(scale, 1.0)) {
          report(ExpmPath::NormalSchur);
          return apply_diagonal_phases(schur.matrixU(), T.diagonal(), t, v);
        }
      }
    }
  }
  report(ExpmPath::ScalingSquaring);
  return expm_series(H, t) * v;
}

const Matrix2& pauli(int mu) {
  static const std::array<Matrix2, 4> sigma = [] {
    std::array<Matrix2, 4> s;
    s[0] << 1, 0, 0, 1;
    s[1] << 0, 1, 1, 0;
    s[2] << 0, -kI, kI, 0;
    s[3] << 1, 0, 0, -1;
    return s;
  }();
  if (mu < 0 || mu > 3) throw PreconditionError("pauli: index must be 0..3");
  return sigma[static_cast<std::size_t>(mu)];
}

double max_abs(const Matrix2& M) { return M.cwiseAbs().maxCoeff(); }

PauliCoefficients pauli_expand(const Matrix2& M, double hermiticity_tol) {
  const double defect = max_abs(M - M.adjoint());
  if (defect > hermiticity_tol) {
    throw PreconditionError("pauli_expand: matrix is not Hermitian, ||M - M^+||_max = " +
                            std::to_string(defect));
  }
  PauliCoefficients out;
  for (int nu = 0; nu < 4; ++nu) {
    out.c[static_cast<std::size_t>(nu)] = 0.5 * (pauli(nu) * M).trace().real();
  }
  return out;
}

Matrix2 pauli_reconstruct(const PauliCoefficients& coeffs) {
  Matrix2 M = Matrix2::Zero();
  for (int nu = 0; nu < 4; ++nu) M += coeffs[nu] * pauli(nu);
  return M;
}

std::vector<cplx> dft(std::span<const cplx> v) {
  if (v.empty()) return {};
  const int dims[1] = {static_cast<int>(v.size())};
  return transform(v, dims, 1, FFTW_FORWARD);
}

std::vector<cplx> idft(std::span<const cplx> v) {
  if (v.empty()) return {};
  const int dims[1] = {static_cast<int>(v.size())};
  return transform(v, dims, 1, FFTW_BACKWARD);
}

std::vector<cplx> dft3(std::span<const cplx> v, std::size_t L, std::size_t components,
                       bool inverse) {
  if (v.size() != L * L * L * components) throw PreconditionError("dft3: size is not L^3 * components");
  const int n = static_cast<int>(L);
  const int dims[3] = {n, n, n};
  return transform(v, dims, static_cast<int>(components), inverse ? FFTW_BACKWARD : FFTW_FORWARD);
}

double norm2(std::span<const cplx> v) {
  double sum = 0.0;
  for (const auto& x : v) sum += std::norm(x);
  return std::sqrt(sum);
}

double fit_linear_slope(std::span<const double> xs, std::span<const double> ys) {
  check_regression_input(xs, ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

double fit_loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  check_regression_input(xs, ys);
  std::vector<double> lx(xs.size());
  std::vector<double> ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw PreconditionError("fit_loglog_slope: all values must be positive");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  return fit_linear_slope(lx, ly);
}

}  // namespace bornlab::numerics
