#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qident/qmatrix.hpp"
#include "qident/rlcm.hpp"

namespace qident {

using Matrix = Eigen::MatrixXd;

// T[r, alpha] = prod over items j in r of theta[j, alpha].
Matrix build_t(const GdinaParams& theta);
Matrix build_t(const Model& m);
// single row, usable beyond the dense size guard
std::vector<double> t_row(const GdinaParams& theta, Response r);

// T built from theta - shift (shift has one entry per item)
Matrix shift_t(const GdinaParams& theta, const std::vector<double>& shift);
// D with D * T(theta) = T(theta - shift); lower unitriangular in subset order
Matrix transform_d(const std::vector<double>& shift);

int rank(const Matrix& t, double tol = 1e-10);
int kruskal_rank(const Matrix& t, double tol = 1e-10);

bool remark3_identifiable_subset_check(const QMatrix& q, const GdinaParams& theta,
                                       const std::vector<double>& p);

// p[a] p[a'+e_k] != p[a'] p[a+e_k] for some a, a' with a_k = a'_k = 0
bool ratio_constraint_holds(const std::vector<double>& p, int attributes, int k, double tol = 1e-12);
// DINA identifiable-subset membership for the scenario classify_dina assigns to q
bool remark2_identifiable_subset_check(const QMatrix& q, const std::vector<double>& p);

}  // namespace qident
