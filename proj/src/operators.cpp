#include "nvphonon/operators.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "nvphonon/errors.hpp"

namespace nvp {

int HilbertSpace::nv_dim() const {
  int d = 1;
  for (int c = 0; c < centers; ++c) d *= levels;
  return d;
}

void validate(const HilbertSpace& space) {
  if (space.levels < 2) throw Error(ErrorCode::InvalidParameter, "need at least two NV levels");
  if (space.centers < 1 || space.centers > 2)
    throw Error(ErrorCode::InvalidParameter, "one or two NV centers supported");
  if (space.fock_dim != 1 && space.fock_dim < 4)
    throw Error(ErrorCode::TruncationTooSmall, "Fock dimension must be 1 (no mode) or >= 4");
}

Matrix annihilation(int fock_dim) {
  Matrix a = Matrix::Zero(fock_dim, fock_dim);
  for (int n = 1; n < fock_dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Matrix ket_bra(int n, int i, int j) {
  Matrix m = Matrix::Zero(n, n);
  m(i, j) = 1.0;
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix embed(const HilbertSpace& space, const std::vector<Matrix>& nv_ops, const Matrix& mode_op) {
  if (static_cast<int>(nv_ops.size()) != space.centers)
    throw Error(ErrorCode::InvalidParameter, "one NV operator per center expected");
  Matrix out = Matrix::Identity(1, 1);
  for (const auto& op : nv_ops) out = kron(out, op);
  return kron(out, mode_op);
}

Matrix on_center(const HilbertSpace& space, const Matrix& nv_op, int center) {
  std::vector<Matrix> ops(static_cast<std::size_t>(space.centers), Matrix::Identity(space.levels, space.levels));
  ops.at(static_cast<std::size_t>(center)) = nv_op;
  return embed(space, ops, Matrix::Identity(space.fock_dim, space.fock_dim));
}

Matrix on_mode(const HilbertSpace& space, const Matrix& mode_op) {
  return kron(Matrix::Identity(space.nv_dim(), space.nv_dim()), mode_op);
}

namespace {

bool same_frequency(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({std::abs(a), std::abs(b), 1.0});
}

}  // namespace

void TimeDependentOperator::add(const Matrix& op, double omega) {
  if (dim_ == 0) dim_ = static_cast<int>(op.rows());
  if (op.rows() != dim_ || op.cols() != dim_)
    throw Error(ErrorCode::InvalidParameter, "operator dimension mismatch");
  for (auto& term : terms_) {
    if (same_frequency(term.omega, omega)) {
      term.op += op;
      return;
    }
  }
  terms_.push_back({op, omega});
}

void TimeDependentOperator::add_with_hc(const Matrix& op, double omega) {
  add(op, omega);
  add(op.adjoint(), -omega);
}

TimeDependentOperator& TimeDependentOperator::operator+=(const TimeDependentOperator& other) {
  for (const auto& t : other.terms_) add(t.op, t.omega);
  return *this;
}

Matrix TimeDependentOperator::at(double t) const {
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const auto& term : terms_)
    out += (term.omega == 0.0 ? cplx(1.0) : std::exp(kI * (term.omega * t))) * term.op;
  return out;
}

TimeDependentOperator TimeDependentOperator::adjoint() const {
  TimeDependentOperator out(dim_);
  for (const auto& term : terms_) out.add(term.op.adjoint(), -term.omega);
  return out;
}

Matrix TimeDependentOperator::static_part() const {
  for (const auto& term : terms_)
    if (term.omega == 0.0) return term.op;
  return Matrix::Zero(dim_, dim_);
}

void TimeDependentOperator::prune(double tol) {
  double largest = 0;
  for (const auto& term : terms_) largest = std::max(largest, term.op.norm());
  std::erase_if(terms_, [&](const Term& term) { return term.op.norm() <= tol * largest; });
}

TimeDependentOperator to_interaction_frame(const TimeDependentOperator& h, const Matrix& h0) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h0);
  const Eigen::VectorXd& e = es.eigenvalues();
  const Matrix& v = es.eigenvectors();
  // Group (nearly) degenerate eigenvalues into spectral projectors.
  const double scale = std::max(1.0, e.cwiseAbs().maxCoeff());
  std::vector<std::pair<double, Matrix>> blocks;
  for (Eigen::Index i = 0; i < e.size();) {
    Eigen::Index j = i + 1;
    while (j < e.size() && e(j) - e(i) <= 1e-10 * scale) ++j;
    const Matrix vi = v.middleCols(i, j - i);
    blocks.emplace_back(e.segment(i, j - i).mean(), vi * vi.adjoint());
    i = j;
  }
  TimeDependentOperator out(h.dim());
  for (const auto& term : h.terms())
    for (const auto& [ea, pa] : blocks) {
      const Matrix left = pa * term.op;
      for (const auto& [eb, pb] : blocks) {
        Matrix piece = left * pb;
        if (piece.norm() <= 1e-14 * (term.op.norm() + 1e-300)) continue;
        double omega = term.omega + ea - eb;
        if (std::abs(omega) <= 1e-12 * std::max(scale, std::abs(term.omega))) omega = 0.0;
        out.add(piece, omega);
      }
    }
  return out;
}

Matrix frame_unitary(const Matrix& h0, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h0);
  const Vector phases = (-kI * t * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

TimeDependentOperator antiderivative(const TimeDependentOperator& v) {
  TimeDependentOperator s(v.dim());
  for (const auto& term : v.terms()) {
    if (term.omega == 0.0) {
      if (term.op.norm() > 0)
        throw Error(ErrorCode::InvalidParameter, "antiderivative needs a purely oscillating operator");
      continue;
    }
    s.add(term.op / (kI * term.omega), term.omega);
  }
  return s;
}

TimeDependentOperator operator*(const TimeDependentOperator& a, const TimeDependentOperator& b) {
  TimeDependentOperator out(a.dim());
  for (const auto& x : a.terms())
    for (const auto& y : b.terms()) out.add(x.op * y.op, x.omega + y.omega);
  return out;
}

TimeDependentOperator operator*(const Matrix& a, const TimeDependentOperator& b) {
  TimeDependentOperator out(b.dim());
  for (const auto& y : b.terms()) out.add(a * y.op, y.omega);
  return out;
}

TimeDependentOperator operator*(const TimeDependentOperator& a, const Matrix& b) {
  TimeDependentOperator out(a.dim());
  for (const auto& x : a.terms()) out.add(x.op * b, x.omega);
  return out;
}

Matrix restrict_to(const Matrix& m, const std::vector<int>& keep) {
  const auto n = static_cast<Eigen::Index>(keep.size());
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = m(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
  return out;
}

TimeDependentOperator restrict_to(const TimeDependentOperator& h, const std::vector<int>& keep) {
  TimeDependentOperator out(static_cast<int>(keep.size()));
  for (const auto& t : h.terms()) out.add(restrict_to(t.op, keep), t.omega);
  return out;
}

SparseTerms::SparseTerms(const TimeDependentOperator& h) : dim(h.dim()) {
  for (const auto& term : h.terms()) {
    SparseMatrix sp = term.op.sparseView();
    sp.makeCompressed();
    if (sp.nonZeros() == 0) continue;
    ops.push_back(std::move(sp));
    omega.push_back(term.omega);
  }
}

SparseMatrix SparseTerms::at(double t) const {
  SparseMatrix out(dim, dim);
  for (std::size_t j = 0; j < ops.size(); ++j) {
    const cplx c = omega[j] == 0.0 ? cplx(1.0) : std::exp(kI * (omega[j] * t));
    out += c * ops[j];
  }
  return out;
}

double hermiticity_defect(const Matrix& h) {
  const double n = h.norm();
  return n == 0 ? 0.0 : (h - h.adjoint()).norm() / n;
}

}  // namespace nvp
