#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "qident/error.hpp"
#include "qident/tmatrix.hpp"

using namespace qident;

namespace {

GdinaParams random_theta(int J, int K, std::mt19937_64& rng) {
    auto q = th::random_q(J, K, rng, 0.5);
    return theta_table(th::random_gdina(q, rng));
}

}  // namespace

TEST_CASE("T matrix basic rows") {
    std::mt19937_64 rng(1);
    auto theta = random_theta(4, 2, rng);
    auto t = build_t(theta);
    CHECK(t.rows() == 16);
    CHECK(t.cols() == 4);
    for (int a = 0; a < 4; ++a) CHECK(t(0, a) == 1.0);
    for (int j = 0; j < 4; ++j)
        for (int a = 0; a < 4; ++a) CHECK(t(1 << j, a) == theta(j, a));
    auto row = t_row(theta, 0b1011);
    for (int a = 0; a < 4; ++a) CHECK(row[a] == doctest::Approx(t(0b1011, a)).epsilon(1e-15));
}

TEST_CASE("T p is the survival function and inverts by inclusion-exclusion") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 10; ++t) {
        int J = 2 + t % 5, K = 1 + t % 3;
        auto q = th::random_q(J, K, rng);
        Model m = th::random_gdina(q, rng);
        auto T = build_t(m);
        Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(m.p.data(), m.p.size());
        Eigen::VectorXd surv = T * p;
        auto f = full_distribution(m);
        const Response R = Response{1} << J;
        for (Response r = 0; r < R; ++r) {
            double s = 0, back = 0;
            for (Response r2 = 0; r2 < R; ++r2) {
                if ((r2 & r) != r) continue;
                s += f[r2];
                back += (std::popcount(r2 ^ r) % 2 ? -1.0 : 1.0) * surv[r2];
            }
            CHECK(std::abs(surv[r] - s) < 1e-12);
            CHECK(std::abs(back - f[r]) < 1e-12);
            // antitone in containment
            for (int j = 0; j < J; ++j)
                if (!(r >> j & 1)) CHECK(surv[r | (Response{1} << j)] <= surv[r] + 1e-15);
        }
    }
}

TEST_CASE("shift transform") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int t = 0; t < 10; ++t) {
        int J = 1 + t % 6;
        auto theta = random_theta(J, 2, rng);
        std::vector<double> shift(J), a(J), b(J), ab(J);
        for (int j = 0; j < J; ++j) {
            shift[j] = u(rng);
            a[j] = u(rng);
            b[j] = u(rng);
            ab[j] = a[j] + b[j];
        }
        auto D = transform_d(shift);
        CHECK((D * build_t(theta) - shift_t(theta, shift)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(std::abs(D.determinant()) - 1.0) == 0.0);
        auto zero = transform_d(std::vector<double>(J, 0.0));
        CHECK(zero.isIdentity());
        // shifting twice composes additively
        GdinaParams moved = theta;
        for (int j = 0; j < J; ++j)
            for (Pattern al = 0; al < 4; ++al) moved(j, al) -= a[j];
        CHECK((shift_t(moved, b) - shift_t(theta, ab)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("two-item D is the hand-expanded inclusion-exclusion matrix") {
    const double s1 = 0.3, s2 = 0.7;
    auto D = transform_d({s1, s2});
    Matrix want(4, 4);
    want << 1, 0, 0, 0,
            -s1, 1, 0, 0,
            -s2, 0, 1, 0,
            s1 * s2, -s2, -s1, 1;
    CHECK((D - want).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("shifting by g zeroes incapable classes on the all-items row") {
    auto q = th::Q({{1, 0}, {0, 1}, {1, 1}});
    DinaParams d{{0.1, 0.2, 0.15}, {0.2, 0.25, 0.1}};
    auto st = shift_t(dina_to_gdina(d, q), d.g);
    for (Pattern a = 0; a < 3; ++a) CHECK(st(7, a) == 0.0);
    CHECK(st(7, 3) == doctest::Approx((0.9 - 0.2) * (0.8 - 0.25) * (0.85 - 0.1)));
}

TEST_CASE("T of identity Q under DINA has full rank with Kronecker determinant") {
    for (int K : {2, 3}) {
        std::vector<std::vector<int>> rows;
        for (int k = 0; k < K; ++k) {
            std::vector<int> r(K, 0);
            r[k] = 1;
            rows.push_back(r);
        }
        auto q = th::Q(rows);
        DinaParams d;
        for (int k = 0; k < K; ++k) {
            d.s.push_back(0.1 + 0.05 * k);
            d.g.push_back(0.2 + 0.03 * k);
        }
        auto T = build_t(dina_to_gdina(d, q));
        CHECK(rank(T) == (1 << K));
        double want = 1;
        for (int k = 0; k < K; ++k) want *= std::pow(d.c(k) - d.g[k], 1 << (K - 1));
        CHECK(std::abs(T.determinant()) == doctest::Approx(std::abs(want)).epsilon(1e-12));
    }
}

TEST_CASE("kruskal rank") {
    Matrix m(3, 3);
    m << 1, 1, 0, 0, 0, 1, 2, 2, 5;
    CHECK(rank(m) == 2);
    CHECK(kruskal_rank(m) == 1);
    CHECK(kruskal_rank(Matrix::Identity(4, 4)) == 4);
    Matrix z = Matrix::Zero(2, 2);
    CHECK(kruskal_rank(z) == 0);
    CHECK_THROWS_AS(kruskal_rank(Matrix::Identity(70, 70)), Error);
}

TEST_CASE("remark 3 check") {
    std::mt19937_64 rng(15);
    int pass = 0;
    for (int t = 0; t < 100; ++t) {
        Model m = th::random_dina(th::q15(), rng);
        if (remark3_identifiable_subset_check(m.q, theta_table(m), m.p)) ++pass;
    }
    CHECK(pass == 100);
    GdinaParams flat(5, 2, 0.4);
    CHECK_FALSE(remark3_identifiable_subset_check(th::q15(), flat, {0.25, 0.25, 0.25, 0.25}));
    CHECK_THROWS_AS(remark3_identifiable_subset_check(th::Q({{1, 1}, {1, 1}, {1, 1}}), GdinaParams(3, 2, 0.5),
                                                      {0.25, 0.25, 0.25, 0.25}),
                    Error);
}

TEST_CASE("remark 2 ratio constraint on Q4x2") {
    std::mt19937_64 rng(16);
    auto q = th::Q({{1, 0}, {0, 1}, {1, 0}, {0, 1}});
    for (int t = 0; t < 50; ++t) CHECK(remark2_identifiable_subset_check(q, dirichlet(4, 3.0, rng)));
    CHECK_FALSE(remark2_identifiable_subset_check(q, {0.25, 0.25, 0.25, 0.25}));
    CHECK(remark2_identifiable_subset_check(th::q18(), {0.25, 0.25, 0.25, 0.25}));
    CHECK_FALSE(ratio_constraint_holds({0.25, 0.25, 0.25, 0.25}, 2, 0));
    CHECK(ratio_constraint_holds({0.1, 0.2, 0.3, 0.4}, 2, 1));
}
