#include "ppsolve/diagnostics.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <json.hpp>

namespace ppsolve {

namespace {

template <Scalar T>
CMatrix dense_c(const SparseMatrix<T>& m) {
  if constexpr (is_complex_v<T>)
    return to_dense(m);
  else
    return to_dense(m).template cast<complex_t>();
}

template <Scalar T>
void require_cap(const PPSplitting<T>& sp, std::size_t cap) {
  if (sp.size() > cap)
    throw SizeCapError("diagnostics: n = " + std::to_string(sp.size()) + " exceeds dense cap " + std::to_string(cap));
}

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

CMatrix identity(Eigen::Index n) { return CMatrix::Identity(n, n); }

}  // namespace

template <Scalar T>
ScaledSplitting scale_splitting(const PPSplitting<T>& sp, const ShiftMatrix<T>& sigma) {
  require_dims(sigma.size() == sp.size(), "diagnostics: Sigma size must match A");
  CMatrix s;
  if constexpr (is_complex_v<T>)
    s = sigma.inv_sqrt_dense();
  else
    s = sigma.inv_sqrt_dense().template cast<complex_t>();
  ScaledSplitting out;
  out.p1 = s * dense_c(sp.P1()) * s;
  out.p2 = s * dense_c(sp.P2()) * s;
  out.a = out.p1 + out.p2;
  return out;
}

template <Scalar T>
CMatrix assemble_gamma(const PPSplitting<T>& sp, const ShiftMatrix<T>& sigma, std::size_t cap) {
  require_cap(sp, cap);
  const CMatrix s = dense_c(sigma.sigma()), p1 = dense_c(sp.P1()), p2 = dense_c(sp.P2());
  Eigen::PartialPivLU<CMatrix> lu1(s + p1), lu2(s + p2);
  return lu1.solve((s - p2) * lu2.solve(s - p1));
}

CMatrix similar_gamma(const ScaledSplitting& s) {
  const auto n = s.p1.rows();
  const CMatrix i = identity(n);
  Eigen::PartialPivLU<CMatrix> lu1(i + s.p1), lu2(i + s.p2);
  return lu1.solve(lu2.solve((i - s.p2) * (i - s.p1)));
}

double spectral_radius(const CMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("spectral_radius: matrix must be square");
  if (m.size() == 0) return 0.0;
  Eigen::ComplexEigenSolver<CMatrix> es(m, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectral_radius: eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double f_measure(const CMatrix& p) {
  if (p.rows() != p.cols()) throw DimensionError("f_measure: matrix must be square");
  const CMatrix i = identity(p.rows());
  Eigen::PartialPivLU<CMatrix> lu(i + p);
  if (p.size() > 0 && lu.rcond() < 1e-14) throw std::runtime_error("f_measure: I + P is numerically singular");
  return spectral_norm(lu.solve(i - p));
}

EigenBasis eigen_basis(const ScaledSplitting& s) {
  EigenBasis b;
  const CMatrix g = similar_gamma(s);
  Eigen::ComplexEigenSolver<CMatrix> es(g, true);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigen_basis: eigensolver failed");
  b.lambda = es.eigenvalues();
  b.x = es.eigenvectors();
  for (Eigen::Index j = 0; j < b.x.cols(); ++j) b.x.col(j).normalize();
  if (b.x.size() > 0) {
    Eigen::BDCSVD<CMatrix> svd(b.x);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    b.cond_x = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  }
  b.defective = !(b.cond_x < 1e10);
  return b;
}

namespace {

/// (x*(I+P*P)x - x*(P+P*)x) / (x*(I+P*P)x + x*(P+P*)x)
double quotient(const CMatrix& p, const Eigen::VectorXcd& x) {
  const Eigen::VectorXcd px = p * x;
  const double base = x.squaredNorm() + px.squaredNorm();
  const double cross = 2.0 * x.dot(px).real();  // x^* P x + x^* P^* x
  const double den = base + cross;
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(0.0, (base - cross) / den);
}

}  // namespace

MBounds m_bounds(const ScaledSplitting& s, const CMatrix& eigvecs) {
  MBounds out;
  out.f1 = f_measure(s.p1);
  out.f2 = f_measure(s.p2);
  const auto n = s.p1.rows();
  const CMatrix i = identity(n);
  Eigen::PartialPivLU<CMatrix> lu2(i + s.p2);
  for (Eigen::Index j = 0; j < eigvecs.cols(); ++j) {
    const Eigen::VectorXcd x = eigvecs.col(j);
    if (x.norm() == 0.0) throw std::invalid_argument("m_bounds: zero eigenvector");
    out.m1.push_back(out.f2 * std::sqrt(quotient(s.p1, x)));
    const Eigen::VectorXcd y = lu2.solve(x - s.p1 * x);
    // y = 0 means (I - P~1) x = 0, so the eigenvalue is 0 and the bound is trivially 0.
    out.m2.push_back(y.norm() <= 1e-300 ? 0.0 : out.f1 * std::sqrt(quotient(s.p2, y)));
  }
  return out;
}

ExactRadius exact_radius_r(const ScaledSplitting& s, const CMatrix& eigvecs) {
  ExactRadius out;
  for (Eigen::Index j = 0; j < eigvecs.cols(); ++j) {
    const Eigen::VectorXcd x = eigvecs.col(j).normalized();
    const Eigen::VectorXcd p1x = s.p1 * x;
    const Eigen::VectorXcd ax = s.a * x;
    const Eigen::VectorXcd q = s.p2 * p1x;  // P~2 P~1 x
    // r1 = x*(I + A*A + P2P1 + P1*P2* + P1*P2*P2P1)x
    const double r1 = x.squaredNorm() + ax.squaredNorm() + 2.0 * x.dot(q).real() + q.squaredNorm();
    // r2 = x*(A + A* + A*P2P1 + P1*P2*A)x
    const double r2 = 2.0 * x.dot(ax).real() + 2.0 * ax.dot(q).real();
    out.r1.push_back(r1);
    out.r2.push_back(r2);
    const double scale = std::max(std::abs(r1), 1e-300);
    out.worst_violation = std::max({out.worst_violation, (r2 - r1) / scale, -r2 / scale, r1 > 0.0 ? 0.0 : 1.0});
    const double ratio = r1 + r2 > 0.0 ? std::max(0.0, (r1 - r2) / (r1 + r2)) : 1.0;
    out.rho = std::max(out.rho, std::sqrt(ratio));
  }
  return out;
}

std::string_view to_string(ConditionStatus s) {
  switch (s) {
    case ConditionStatus::holds: return "holds";
    case ConditionStatus::fails: return "fails";
    case ConditionStatus::unknown: return "unknown";
  }
  return "unknown";
}

namespace {

/// Orthonormal basis of the numerical null space of m.
CMatrix null_space(const CMatrix& m, double tol) {
  Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

Eigen::Index numerical_rank(const CMatrix& m, double tol) {
  if (m.cols() == 0) return 0;
  Eigen::BDCSVD<CMatrix> svd(m);
  const auto& sv = svd.singularValues();
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > tol) ++r;
  return r;
}

/// nul(Pa) + nul(Pb + Pb^*) spans the whole space.
bool null_spaces_span(const CMatrix& pa, const CMatrix& pb, double tol) {
  const CMatrix n1 = null_space(pa, tol);
  const CMatrix n2 = null_space(pb + pb.adjoint(), tol);
  if (n1.cols() + n2.cols() < pa.rows()) return false;
  CMatrix joined(pa.rows(), n1.cols() + n2.cols());
  joined << n1, n2;
  return numerical_rank(joined, 1e-8) == pa.rows();
}

ConditionResult verdict(bool holds, double margin, std::string note = {}) {
  return {holds ? ConditionStatus::holds : ConditionStatus::fails, margin, std::move(note)};
}

}  // namespace

template <Scalar T>
std::map<std::string, ConditionResult> check_conditions(const PPSplitting<T>& sp, const ShiftMatrix<T>& sigma,
                                                        const ScaledSplitting& s, const EigenBasis* basis) {
  std::map<std::string, ConditionResult> c;
  const auto n = static_cast<Eigen::Index>(sp.size());
  const DefinitenessReport& ad = sp.a_definiteness();
  const bool a_pd = is_pd(ad.kind);
  const std::string no_pd = a_pd ? "" : "A is not PD (" + std::string(to_string(ad.kind)) + ")";
  const auto& d1 = sp.p1_definiteness();
  const auto& d2 = sp.p2_definiteness();
  const double scale = std::max(frobenius_norm(sp.A()), 1e-300);

  auto gated = [&](bool cond, double margin, const std::string& note = {}) {
    if (!a_pd) return ConditionResult{ConditionStatus::fails, margin, no_pd};
    return verdict(cond, margin, note);
  };

  c["one_part_HPSD"] = gated(is_hermitian_kind(d1.kind) || is_hermitian_kind(d2.kind),
                               std::max(d1.margin(), d2.margin()));
  c["one_part_skew_hermitian"] = gated(sp.p1_skew() || sp.p2_skew(), 0.0);
  c["one_part_PD"] = gated(is_pd(d1.kind) || is_pd(d2.kind), std::max(d1.lambda_min, d2.lambda_min));

  const CMatrix p1 = dense_c(sp.P1()), p2 = dense_c(sp.P2());
  const double null_tol = 1e-10 * scale;
  const bool span12 = null_spaces_span(p1, p2, null_tol);
  const bool span21 = !span12 && null_spaces_span(p2, p1, null_tol);
  c["null_space_span"] = gated(span12 || span21, 0.0, span12 ? "nul(P1)+nul(P2+P2*)" : span21 ? "nul(P2)+nul(P1+P1*)" : "");

  // K = A~ + P~1^* P~2^* A~ being PD needs no premise on A.
  const CMatrix k = s.a + s.p1.adjoint() * s.p2.adjoint() * s.a;
  const CMatrix kh = k + k.adjoint();
  const double kmin = hermitian_min_eigenvalue<complex_t>(kh);
  const double ktol = 1e-10 * std::max(kh.norm(), 1e-300);
  c["K_PD"] = verdict(kmin > ktol, kmin - ktol);

  const double comm_scale = s.p1.norm() * s.p2.norm() + 1.0;
  const double comm = (s.p1 * s.p2 - s.p2 * s.p1).norm();
  c["commuting"] = gated(comm <= 1e-10 * comm_scale, comm);

  if (!basis || basis->defective) {
    const std::string why = basis ? "eigenvector basis is numerically defective" : "eigenvectors not computed";
    for (const char* key : {"eigvecs_in_null_H1_are_in_null_P1", "eigvecs_in_null_union",
                            "commuting_on_eigvecs"})
      c[key] = {ConditionStatus::unknown, 0.0, why};
    return c;
  }

  CMatrix sm;
  if constexpr (is_complex_v<T>)
    sm = sigma.inv_sqrt_dense();
  else
    sm = sigma.inv_sqrt_dense().template cast<complex_t>();
  const CMatrix h2 = p2 + p2.adjoint();
  bool t1 = true, t2 = true, commuting = true;
  double comm_worst = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::VectorXcd xl = basis->x.col(j);
    const Eigen::VectorXcd x = (sm * xl).normalized();  // eigenvector of the iteration matrix
    const Eigen::VectorXcd p1x = p1 * x;
    const double h1q = 2.0 * x.dot(p1x).real();
    const bool in_null_h1 = h1q <= 1e-9 * scale;
    const bool in_null_p1 = p1x.norm() <= 1e-7 * scale;
    if (in_null_h1 && !in_null_p1) t1 = false;
    if (!in_null_p1 && (h2 * x).norm() > 1e-7 * scale) t2 = false;
    const double cw = (s.p1 * (s.p2 * xl) - s.p2 * (s.p1 * xl)).norm();
    comm_worst = std::max(comm_worst, cw);
    if (cw > 1e-10 * comm_scale) commuting = false;
  }
  c["eigvecs_in_null_H1_are_in_null_P1"] = gated(t1, 0.0);
  c["eigvecs_in_null_union"] = gated(t2, 0.0);
  c["commuting_on_eigvecs"] = gated(commuting, comm_worst);
  return c;
}

template <Scalar T>
ConvergenceDiagnostics diagnose(const PPSplitting<T>& sp, const ShiftMatrix<T>& sigma, const DiagnoseOptions& opts) {
  require_cap(sp, opts.cap);
  ConvergenceDiagnostics d;
  d.n = sp.size();
  d.certificates = sp.certificates();
  const ScaledSplitting s = scale_splitting(sp, sigma);
  d.rho = spectral_radius(assemble_gamma(sp, sigma, opts.cap));
  if (opts.similar_form) d.rho_similar = spectral_radius(similar_gamma(s));
  d.f_P1 = f_measure(s.p1);
  d.f_P2 = f_measure(s.p2);
  EigenBasis basis;
  if (opts.eigenvectors) {
    basis = eigen_basis(s);
    d.defective = basis.defective;
    d.eigvec_condition = basis.cond_x;
    const MBounds mb = m_bounds(s, basis.x);
    for (std::size_t j = 0; j < mb.m1.size(); ++j) {
      d.m1_max = std::max(d.m1_max, mb.m1[j]);
      d.m2_max = std::max(d.m2_max, mb.m2[j]);
      d.m_bound = std::max(d.m_bound, std::min(mb.m1[j], mb.m2[j]));
    }
    const ExactRadius er = exact_radius_r(s, basis.x);
    d.exact_rho_from_r = er.rho;
    d.r_violation = er.worst_violation;
    if (sp.certified() && !d.defective) {
      if (d.r_violation > 1e-9)
        throw TheoryCheckFailure("r1 >= r2 >= 0 violated by " + std::to_string(d.r_violation));
      if (d.rho_similar >= 0.0 && std::abs(d.rho - d.rho_similar) > 1e-10 * std::max(1.0, d.rho))
        throw TheoryCheckFailure("spectral radii of the two similar forms differ by " +
                                 std::to_string(std::abs(d.rho - d.rho_similar)));
    }
  }
  d.conditions = check_conditions(sp, sigma, s, opts.eigenvectors ? &basis : nullptr);
  for (const auto& [name, res] : d.conditions)
    if (res.status == ConditionStatus::holds) d.guaranteed = true;
  return d;
}

std::string to_json(const ConvergenceDiagnostics& d, int indent) {
  nlohmann::ordered_json j;
  auto num = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  j["n"] = d.n;
  j["rho"] = num(d.rho);
  j["rho_similar_form"] = d.rho_similar >= 0.0 ? num(d.rho_similar) : nullptr;
  j["f_P1"] = num(d.f_P1);
  j["f_P2"] = num(d.f_P2);
  j["m1_max"] = num(d.m1_max);
  j["m2_max"] = num(d.m2_max);
  j["m_bound"] = num(d.m_bound);
  j["exact_rho_from_r"] = d.exact_rho_from_r >= 0.0 ? num(d.exact_rho_from_r) : nullptr;
  j["r_identity_violation"] = num(d.r_violation);
  j["defective"] = d.defective;
  j["eigenvector_condition"] = num(d.eigvec_condition);
  nlohmann::ordered_json conds = nlohmann::ordered_json::object();
  for (const auto& [name, r] : d.conditions) {
    conds[name] = {{"status", std::string(to_string(r.status))}, {"margin", num(r.margin)}};
    if (!r.note.empty()) conds[name]["note"] = r.note;
  }
  j["conditions"] = conds;
  j["verdict"] = d.guaranteed ? "guaranteed convergent" : "not guaranteed";
  j["certificates"] = d.certificates;
  return j.dump(indent);
}

#define PPSOLVE_INSTANTIATE(T)                                                                                 \
  template ScaledSplitting scale_splitting(const PPSplitting<T>&, const ShiftMatrix<T>&);                      \
  template CMatrix assemble_gamma(const PPSplitting<T>&, const ShiftMatrix<T>&, std::size_t);                  \
  template std::map<std::string, ConditionResult> check_conditions(const PPSplitting<T>&, const ShiftMatrix<T>&, \
                                                                   const ScaledSplitting&, const EigenBasis*);  \
  template ConvergenceDiagnostics diagnose(const PPSplitting<T>&, const ShiftMatrix<T>&, const DiagnoseOptions&);

PPSOLVE_INSTANTIATE(double)
PPSOLVE_INSTANTIATE(complex_t)

#undef PPSOLVE_INSTANTIATE

}  // namespace ppsolve
