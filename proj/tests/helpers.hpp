#pragma once

#include <algorithm>
#include <bit>
#include <initializer_list>
#include <numeric>
#include <random>
#include <vector>

#include "qident/estimate.hpp"
#include "qident/qmatrix.hpp"
#include "qident/rlcm.hpp"

namespace th {

using qident::QMatrix;

inline QMatrix Q(std::vector<std::vector<int>> rows) { return QMatrix(rows); }

inline QMatrix q18() { return Q({{0, 1}, {1, 1}, {1, 1}, {1, 0}, {0, 1}}); }
inline QMatrix q15() { return Q({{0, 1}, {1, 1}, {1, 0}, {1, 0}, {0, 1}}); }
inline QMatrix q5() { return Q({{0, 1}, {1, 0}, {1, 0}, {0, 1}, {0, 1}}); }
inline QMatrix q10() { return Q({{0, 1}, {0, 1}, {0, 1}, {1, 0}, {0, 1}}); }
inline QMatrix q21() { return Q({{0, 1}, {1, 1}, {0, 1}, {1, 1}, {0, 1}}); }

inline QMatrix q12x8() {
    std::vector<std::vector<int>> rows;
    for (int k = 0; k < 8; ++k) {
        std::vector<int> r(8, 0);
        r[k] = 1;
        rows.push_back(r);
    }
    for (const char* s : {"00111011", "01010111", "10001111", "11111101"}) {
        std::vector<int> r;
        for (int k = 0; k < 8; ++k) r.push_back(s[k] - '0');
        rows.push_back(r);
    }
    return Q(rows);
}

inline QMatrix from_strings(std::initializer_list<const char*> rows) {
    std::vector<std::vector<int>> out;
    for (const char* s : rows) {
        std::vector<int> r;
        for (; *s; ++s) r.push_back(*s - '0');
        out.push_back(r);
    }
    return Q(out);
}

// 20x3 incomplete matrix and the two merge targets; `mid` replaces the
// bold rows
inline QMatrix inc_k3(const char* mid) {
    std::vector<const char*> rows = {"100", "010", mid};
    for (int b = 0; b < 5; ++b)
        for (const char* r : {"100", "110", mid}) rows.push_back(r);
    rows.push_back("111");
    rows.push_back("111");
    std::vector<std::vector<int>> out;
    for (const char* s : rows) {
        std::vector<int> r;
        for (; *s; ++s) r.push_back(*s - '0');
        out.push_back(r);
    }
    return Q(out);
}

inline QMatrix inc_k5(const char* mid) {
    std::vector<const char*> rows = {"10000", "01000", "00100", "00010", mid,
                                     "10000", "11000", "11100", "11110", mid};
    for (int b = 0; b < 2; ++b)
        for (const char* r : {"10000", "11000", "11100", "11110", "11111"}) rows.push_back(r);
    std::vector<std::vector<int>> out;
    for (const char* s : rows) {
        std::vector<int> r;
        for (; *s; ++s) r.push_back(*s - '0');
        out.push_back(r);
    }
    return Q(out);
}

// 20x3 and 20x5 matrices whose first attribute sits on two items only
inline QMatrix two_item_k3() {
    std::vector<const char*> rows = {"110", "101"};
    for (int b = 0; b < 6; ++b)
        for (const char* r : {"010", "001", "011"}) rows.push_back(r);
    std::vector<std::vector<int>> out;
    for (const char* s : rows) {
        std::vector<int> r;
        for (; *s; ++s) r.push_back(*s - '0');
        out.push_back(r);
    }
    return Q(out);
}

inline QMatrix two_item_k5() {
    return from_strings({"11000", "10100", "01000", "00100", "00010", "00001", "01000", "00100", "00010", "00001",
                         "01000", "00100", "00010", "00001", "01100", "01010", "01001", "00110", "00101", "00011"});
}

// 0.2 at no mastery, 0.8 at full mastery of q_j, every effect equal
inline qident::GdinaParams equal_effects(const QMatrix& q) {
    qident::GdinaParams t(q.items(), q.attributes());
    for (int j = 0; j < q.items(); ++j) {
        const int L = std::popcount(q.row(j));
        for (qident::Pattern a = 0; a < t.classes(); ++a) {
            const int m = std::popcount(a & q.row(j));
            t(j, a) = L == 0 ? 0.5 : 0.2 + 0.6 * double((1 << m) - 1) / double((1 << L) - 1);
        }
    }
    return t;
}

inline QMatrix random_q(int J, int K, std::mt19937_64& rng, double density = 0.4, bool no_zero_rows = true) {
    std::bernoulli_distribution bit(density);
    std::uniform_int_distribution<int> pick(0, K - 1);
    QMatrix q(J, K);
    for (int j = 0; j < J; ++j) {
        for (int k = 0; k < K; ++k) q.set(j, k, bit(rng));
        if (no_zero_rows && q.row(j) == 0) q.set(j, pick(rng), 1);
    }
    return q;
}

inline std::vector<int> random_perm(int n, std::mt19937_64& rng) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

inline qident::Model random_dina(const QMatrix& q, std::mt19937_64& rng, double dirichlet_alpha = 3.0) {
    std::uniform_real_distribution<double> u(0.1, 0.3);
    qident::DinaParams d;
    for (int j = 0; j < q.items(); ++j) {
        d.s.push_back(u(rng));
        d.g.push_back(u(rng));
    }
    qident::Model m;
    m.kind = qident::ModelKind::Dina;
    m.q = q;
    m.params = d;
    m.p = qident::dirichlet(std::size_t{1} << q.attributes(), dirichlet_alpha, rng);
    return m;
}

// theta from random sorted cell values, stringent order by cell size
inline qident::Model random_gdina(const QMatrix& q, std::mt19937_64& rng) {
    qident::Model m = qident::random_init(qident::ModelKind::Gdina, q, rng);
    m.p = qident::dirichlet(std::size_t{1} << q.attributes(), 3.0, rng);
    return m;
}

}  // namespace th
