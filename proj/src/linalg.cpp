#include "risec/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace risec {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DegenerateGeometry: return "degenerate geometry";
        case ErrorKind::Dimension: return "dimension mismatch";
        case ErrorKind::Config: return "config error";
        case ErrorKind::CapExceeded: return "cap exceeded";
        case ErrorKind::Infeasible: return "infeasible";
        case ErrorKind::Io: return "io error";
        case ErrorKind::Version: return "version mismatch";
    }
    return "error";
}

namespace linalg {

CMat hermitian_part(const CMat& m) { return 0.5 * (m + m.adjoint()); }

CMat psd_project(const CMat& m, double floor) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(m));
    RVec ev = es.eigenvalues().cwiseMax(floor);
    return es.eigenvectors() * ev.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
}

double lambda_min(const CMat& h) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(h), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double lambda_max(const CMat& h) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(h), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

CVec top_eigenvector(const CMat& h, double* eigenvalue) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(h));
    const Eigen::Index last = h.rows() - 1;
    if (eigenvalue) *eigenvalue = es.eigenvalues()(last);
    return es.eigenvectors().col(last);
}

RankOne rank_one_extract(const CMat& m) {
    RankOne out;
    const double norm = m.norm();
    if (norm == 0.0) {
        out.vector = CVec::Zero(m.rows());
        return out;
    }
    double l1 = 0.0;
    CVec u = top_eigenvector(m, &l1);
    l1 = std::max(l1, 0.0);
    // fix the global phase so the largest-magnitude entry is real positive
    Eigen::Index idx = 0;
    u.cwiseAbs().maxCoeff(&idx);
    if (std::abs(u(idx)) > 0.0) u *= std::conj(u(idx)) / std::abs(u(idx));
    out.vector = std::sqrt(l1) * u;
    out.gap = (m - l1 * u * u.adjoint()).norm() / norm;
    return out;
}

GeneralizedTop generalized_top(const CMat& a, const CMat& b) {
    Eigen::LLT<CMat> llt(hermitian_part(b));
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::Dimension, "generalized_top: B is not positive definite");
    const CMat& l = llt.matrixL();
    // C = L^{-1} A L^{-H}
    CMat tmp = llt.matrixL().solve(hermitian_part(a));
    CMat c = llt.matrixL().solve(tmp.adjoint()).adjoint();
    double value = 0.0;
    CVec y = top_eigenvector(c, &value);
    GeneralizedTop out;
    out.vector = l.adjoint().triangularView<Eigen::Upper>().solve(y);
    out.value = value;
    return out;
}

CMat partial_trace_streams(const CMat& lifted, Eigen::Index block) {
    const Eigen::Index streams = lifted.rows() / block;
    CMat out = CMat::Zero(block, block);
    for (Eigen::Index s = 0; s < streams; ++s) out += lifted.block(s * block, s * block, block, block);
    return out;
}

CMat lift_streams(const CMat& m, Eigen::Index streams) {
    const Eigen::Index n = m.rows();
    CMat out = CMat::Zero(n * streams, n * streams);
    for (Eigen::Index s = 0; s < streams; ++s) out.block(s * n, s * n, n, n) = m;
    return out;
}

CMat diag_part(const CMat& m) {
    CMat d = CMat::Zero(m.rows(), m.cols());
    d.diagonal() = m.diagonal();
    return d;
}

bool is_hermitian(const CMat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.norm());
    return (m - m.adjoint()).norm() <= tol * scale;
}

}  // namespace linalg
}  // namespace risec
