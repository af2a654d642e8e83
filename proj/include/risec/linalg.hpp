#pragma once

#include "risec/common.hpp"

namespace risec::linalg {

CMat hermitian_part(const CMat& m);

/// Projection onto the PSD cone: eigenvalues below `floor` are clamped to it.
CMat psd_project(const CMat& m, double floor = 0.0);

double lambda_min(const CMat& hermitian);
double lambda_max(const CMat& hermitian);

/// Unit-norm eigenvector of the largest eigenvalue.
CVec top_eigenvector(const CMat& hermitian, double* eigenvalue = nullptr);

struct RankOne {
    CVec vector;  // sqrt(lambda_1) * u_1
    double gap = 0.0;
};

/// Dominant rank-one factor of a PSD matrix and the relative Frobenius error
/// ||M - l1 u1 u1^H||_F / ||M||_F. The zero matrix maps to (0, 0).
RankOne rank_one_extract(const CMat& m);

struct GeneralizedTop {
    CVec vector;  // normalised so that v^H B v = 1
    double value = 0.0;
};

/// Largest generalized eigenpair of (A, B) with A Hermitian and B Hermitian PD.
GeneralizedTop generalized_top(const CMat& a, const CMat& b);

/// Sum of the diagonal N x N blocks of a (N*S) x (N*S) matrix (trace over the
/// stream index of a column-stacked vec(W)).
CMat partial_trace_streams(const CMat& lifted, Eigen::Index block);

/// I_streams (x) m
CMat lift_streams(const CMat& m, Eigen::Index streams);

/// Diagonal matrix holding the diagonal of m.
CMat diag_part(const CMat& m);

inline double real_trace(const CMat& m) { return m.trace().real(); }

bool is_hermitian(const CMat& m, double tol);

}  // namespace risec::linalg
