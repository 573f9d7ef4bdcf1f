#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace nvp {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

inline constexpr cplx kI{0.0, 1.0};

/// Tensor-product space (NV 1) ⊗ (NV 2) ⊗ ... ⊗ (Fock), Fock innermost.
/// A fock_dim of 1 means no phonon mode.
struct HilbertSpace {
  int levels = 3;
  int centers = 1;
  int fock_dim = 16;

  int nv_dim() const;
  int dim() const { return nv_dim() * fock_dim; }
};

/// Throws InvalidParameter unless levels >= 2, centers in {1, 2} and
/// fock_dim is 1 or at least 4.
void validate(const HilbertSpace& space);

Matrix annihilation(int fock_dim);
Matrix ket_bra(int n, int i, int j);
Matrix kron(const Matrix& a, const Matrix& b);

/// Single-NV operator acting on `center`, identity elsewhere.
Matrix on_center(const HilbertSpace& space, const Matrix& nv_op, int center);
/// Operator on the phonon mode, identity on every NV.
Matrix on_mode(const HilbertSpace& space, const Matrix& mode_op);
/// Full product nv_ops[0] ⊗ nv_ops[1] ⊗ ... ⊗ mode_op.
Matrix embed(const HilbertSpace& space, const std::vector<Matrix>& nv_ops, const Matrix& mode_op);

/// Sum of terms M_j exp(i omega_j t). Terms with equal frequency are merged.
struct Term {
  Matrix op;
  double omega;
};

class TimeDependentOperator {
 public:
  TimeDependentOperator() = default;
  explicit TimeDependentOperator(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  const std::vector<Term>& terms() const { return terms_; }

  void add(const Matrix& op, double omega = 0.0);
  /// Adds op e^{iωt} + op† e^{-iωt}.
  void add_with_hc(const Matrix& op, double omega);
  TimeDependentOperator& operator+=(const TimeDependentOperator& other);

  Matrix at(double t) const;
  TimeDependentOperator adjoint() const;
  /// Static part (the omega = 0 term, zero if absent).
  Matrix static_part() const;
  /// Removes terms whose norm is below `tol` times the largest term norm.
  void prune(double tol = 1e-15);

 private:
  int dim_ = 0;
  std::vector<Term> terms_;
};

/// e^{i H0 t} H(t) e^{-i H0 t} for Hermitian H0, re-expressed as terms.
TimeDependentOperator to_interaction_frame(const TimeDependentOperator& h, const Matrix& h0);

/// e^{-i H0 t} for Hermitian H0.
Matrix frame_unitary(const Matrix& h0, double t);

/// Antiderivative S(t) = ∫ V dt of a purely oscillating operator (no static part).
TimeDependentOperator antiderivative(const TimeDependentOperator& v);

/// Product A(t) B(t) as a term list (frequencies add).
TimeDependentOperator operator*(const TimeDependentOperator& a, const TimeDependentOperator& b);
TimeDependentOperator operator*(const Matrix& a, const TimeDependentOperator& b);
TimeDependentOperator operator*(const TimeDependentOperator& a, const Matrix& b);

/// Restriction of every term to the rows/columns in `keep`.
TimeDependentOperator restrict_to(const TimeDependentOperator& h, const std::vector<int>& keep);
Matrix restrict_to(const Matrix& m, const std::vector<int>& keep);

/// Frequency-tagged sparse terms for fast application inside integrators.
struct SparseTerms {
  std::vector<SparseMatrix> ops;
  std::vector<double> omega;
  int dim = 0;

  explicit SparseTerms(const TimeDependentOperator& h);
  SparseTerms() = default;
  SparseMatrix at(double t) const;
  /// Returns H(t) x.
  template <class Dense>
  Dense apply(double t, const Dense& x) const {
    Dense out = Dense::Zero(x.rows(), x.cols());
    for (std::size_t j = 0; j < ops.size(); ++j) {
      const cplx c = omega[j] == 0.0 ? cplx(1.0) : std::exp(kI * (omega[j] * t));
      out.noalias() += c * (ops[j] * x);
    }
    return out;
  }
};

/// Relative Hermiticity defect ‖H - H†‖ / ‖H‖ (0 for H = 0).
double hermiticity_defect(const Matrix& h);

}  // namespace nvp
