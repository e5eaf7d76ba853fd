#include "qident/tmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qident/error.hpp"

namespace qident {

namespace {

GdinaParams select_items(const GdinaParams& theta, const std::vector<int>& rows) {
    GdinaParams out(static_cast<int>(rows.size()), theta.attributes());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Pattern a = 0; a < theta.classes(); ++a) out(static_cast<int>(i), a) = theta(rows[i], a);
    return out;
}

}  // namespace

Matrix build_t(const GdinaParams& theta) {
    const int J = theta.items();
    if (J > 20) throw Error(ErrorCode::TooLarge, "dense T-matrix needs J <= 20");
    const Eigen::Index rows = Eigen::Index{1} << J;
    Matrix t(rows, static_cast<Eigen::Index>(theta.classes()));
    for (Pattern a = 0; a < theta.classes(); ++a) {
        t(0, a) = 1.0;
        for (int j = 0; j < J; ++j) {
            const Eigen::Index half = Eigen::Index{1} << j;
            for (Eigen::Index r = 0; r < half; ++r) t(r + half, a) = t(r, a) * theta(j, a);
        }
    }
    return t;
}

Matrix build_t(const Model& m) { return build_t(theta_table(m)); }

std::vector<double> t_row(const GdinaParams& theta, Response r) {
    std::vector<double> row(theta.classes(), 1.0);
    for (int j = 0; j < theta.items(); ++j)
        if (r >> j & 1u)
            for (Pattern a = 0; a < theta.classes(); ++a) row[a] *= theta(j, a);
    return row;
}

Matrix shift_t(const GdinaParams& theta, const std::vector<double>& shift) {
    if (static_cast<int>(shift.size()) != theta.items())
        throw Error(ErrorCode::DimensionMismatch, "shift needs one entry per item");
    GdinaParams shifted = theta;
    for (int j = 0; j < theta.items(); ++j)
        for (Pattern a = 0; a < theta.classes(); ++a) shifted(j, a) -= shift[j];
    return build_t(shifted);
}

Matrix transform_d(const std::vector<double>& shift) {
    const int J = static_cast<int>(shift.size());
    if (J > 12) throw Error(ErrorCode::TooLarge, "explicit D needs J <= 12");
    const Eigen::Index n = Eigen::Index{1} << J;
    Matrix d = Matrix::Zero(n, n);
    // prod_{j in r}(theta_j - s_j) = sum over r' inside r of prod_{j in r\r'}(-s_j) prod_{j in r'} theta_j
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index sub = r;; sub = (sub - 1) & r) {
            double v = 1.0;
            for (int j = 0; j < J; ++j)
                if (((r & ~sub) >> j) & 1) v *= -shift[j];
            d(r, sub) = v;
            if (sub == 0) break;
        }
    }
    return d;
}

int rank(const Matrix& t, double tol) {
    if (t.size() == 0) return 0;
    Eigen::FullPivLU<Matrix> lu(t);
    lu.setThreshold(tol);
    return static_cast<int>(lu.rank());
}

int kruskal_rank(const Matrix& t, double tol) {
    const int n = static_cast<int>(t.cols());
    if (n > 64) throw Error(ErrorCode::TooLarge, "Kruskal rank needs at most 64 columns");
    const int r = rank(t, tol);
    if (r == n) return n;
    // smallest dependent column subset has size s; the Kruskal rank is s - 1
    long long budget = 5'000'000;
    for (int s = 1; s <= r + 1; ++s) {
        std::vector<int> idx(s);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            if (--budget < 0) throw Error(ErrorCode::TooLarge, "Kruskal rank subset budget exhausted");
            Matrix sub(t.rows(), s);
            for (int i = 0; i < s; ++i) sub.col(i) = t.col(idx[i]);
            if (rank(sub, tol) < s) return s - 1;
            int i = s - 1;
            while (i >= 0 && idx[i] == n - s + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int k = i + 1; k < s; ++k) idx[k] = idx[k - 1] + 1;
        }
    }
    return r;
}

bool remark3_identifiable_subset_check(const QMatrix& q, const GdinaParams& theta,
                                       const std::vector<double>& p) {
    auto de = check_conditions_DE(q);
    if (!(de.D && de.E)) throw Error(ErrorCode::NoPartition, "Q does not satisfy Conditions D and E");
    if (de.rest.size() > 20) throw Error(ErrorCode::TooLarge, "remainder block needs at most 20 items");
    const int full = static_cast<int>(theta.classes());
    if (rank(build_t(select_items(theta, de.block1))) < full) return false;
    if (rank(build_t(select_items(theta, de.block2))) < full) return false;
    Matrix rest = build_t(select_items(theta, de.rest));
    for (int a = 0; a < full; ++a) rest.col(a) *= p[a];
    for (int a = 0; a < full; ++a)
        for (int b = a + 1; b < full; ++b)
            if ((rest.col(a) - rest.col(b)).cwiseAbs().maxCoeff() <= 1e-10) return false;
    return true;
}

bool ratio_constraint_holds(const std::vector<double>& p, int attributes, int k, double tol) {
    const Pattern n = Pattern{1} << attributes;
    const Pattern ek = Pattern{1} << k;
    for (Pattern a = 0; a < n; ++a) {
        if (a & ek) continue;
        for (Pattern b = a + 1; b < n; ++b) {
            if (b & ek) continue;
            if (std::abs(p[a] * p[b | ek] - p[b] * p[a | ek]) > tol) return true;
        }
    }
    return false;
}

bool remark2_identifiable_subset_check(const QMatrix& q, const std::vector<double>& p) {
    validate_proportions(p, q.attributes(), false);
    auto v = classify_dina(q);
    switch (v.scenario) {
        case Scenario::StrictlyIdentifiable: return true;
        case Scenario::GenericScenarioB1:
        case Scenario::LocalGenericC:
            return ratio_constraint_holds(p, q.attributes(), v.pivot_attribute);
        case Scenario::GenericScenarioB2:
            if (!v.also_applicable.empty())  // b.1 also applies and needs only the pivot
                return ratio_constraint_holds(p, q.attributes(), v.pivot_attribute);
            for (int k = 0; k < q.attributes(); ++k)
                if (!ratio_constraint_holds(p, q.attributes(), k)) return false;
            return true;
        default: return false;
    }
}

}  // namespace qident
