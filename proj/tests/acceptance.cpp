// acceptance N: runs one acceptance criterion and prints a single PASS/FAIL line
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "helpers.hpp"
#include "qident/error.hpp"
#include "qident/estimate.hpp"
#include "qident/parallel.hpp"
#include "qident/tmatrix.hpp"
#include "qident/witness.hpp"

using namespace qident;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int report(int n, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, detail.c_str());
    return ok ? 0 : 1;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

bool brute_generic_complete(const QMatrix& q) {
    const int J = q.items(), K = q.attributes();
    if (J < K) return false;
    std::vector<bool> choose(J, false);
    std::fill(choose.begin(), choose.begin() + K, true);
    std::vector<int> perm(K);
    do {
        std::vector<int> rows;
        for (int j = 0; j < J; ++j)
            if (choose[j]) rows.push_back(j);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            bool ok = true;
            for (int i = 0; i < K && ok; ++i) ok = q.at(rows[i], perm[i]);
            if (ok) return true;
        } while (std::next_permutation(perm.begin(), perm.end()));
    } while (std::prev_permutation(choose.begin(), choose.end()));
    return false;
}

// 1 ---------------------------------------------------------------------------
int criterion1() {
    auto t0 = Clock::now();
    auto all = enumerate_canonical(5, 2);
    int undetermined = 0, strict_ok = 0, b2_ok = 0, a_forms = 0, a_ok = 0;
    for (const auto& q : all) {
        auto v = classify_dina(q);
        if (v.scenario == Scenario::Undetermined) ++undetermined;
        if (q_equivalent(q, th::q15()) || q_equivalent(q, th::q18()))
            strict_ok += v.scenario == Scenario::StrictlyIdentifiable;
        if (q_equivalent(q, th::q5())) b2_ok += v.scenario == Scenario::GenericScenarioB2;
        // scenario (a) form: some attribute on exactly two items, one measuring
        // it alone and the other measuring everything
        for (int k = 0; k < 2; ++k) {
            if (q.column_sum(k) != 2) continue;
            bool single = false, full = false;
            for (int j = 0; j < 5; ++j) {
                single |= q.row(j) == (Pattern{1} << k);
                full |= q.row(j) == 3u;
            }
            if (single && full) {
                ++a_forms;
                a_ok += v.scenario == Scenario::NotLocallyGeneric_A;
                break;
            }
        }
    }
    const bool q1 = classify_dina(th::Q({{1, 0}, {0, 1}, {1, 1}, {0, 1}})).scenario == Scenario::NotLocallyGeneric_A;
    const double secs = seconds_since(t0);
    const bool ok = all.size() == 121 && undetermined == 0 && strict_ok == 2 && b2_ok == 1 && a_forms > 0 &&
                    a_ok == a_forms && q1 && secs < 1.0;
    return report(1, ok,
                  std::to_string(all.size()) + " matrices, " + std::to_string(undetermined) + " undetermined, Q15/Q18 strict " +
                      std::to_string(strict_ok) + "/2, Q5 b.2 " + std::to_string(b2_ok) + "/1, scenario (a) forms " +
                      std::to_string(a_ok) + "/" + std::to_string(a_forms) + ", Q1 " + (q1 ? "a" : "wrong") + ", " +
                      fmt("%.3f s", secs));
}

// 2 ---------------------------------------------------------------------------
int criterion2() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> kd(1, 5), jd(1, 8), dens(1, 6);
    int disagree = 0, complete = 0;
    for (int t = 0; t < 1000; ++t) {
        const int K = kd(rng), J = jd(rng);
        auto q = th::random_q(J, K, rng, dens(rng) / 10.0, false);
        const bool fast = check_generic_completeness(q).ok;
        disagree += fast != brute_generic_complete(q);
        complete += fast;
    }
    const double secs = seconds_since(t0);
    return report(2, disagree == 0 && secs < 10.0,
                  "1000 matrices, " + std::to_string(disagree) + " disagreements, " + std::to_string(complete) +
                      " generically complete, " + fmt("%.2f s", secs));
}

// 3 ---------------------------------------------------------------------------
int criterion3() {
    auto t0 = Clock::now();
    std::string detail;
    bool ok = true;

    DinaParams flat{std::vector<double>(4, 0.2), std::vector<double>(4, 0.2)};
    auto q24 = dina_q24_two_solutions(flat, {0.25, 0.25, 0.25, 0.25});
    double worst = 0;
    int certified = 0;
    for (auto& w : q24) {
        worst = std::max(worst, w.certified_max_diff);
        certified += is_certified(w);
    }
    ok = ok && certified >= 2 && worst < 1e-12;
    detail += "(i) " + std::to_string(certified) + " alternatives, max diff " + fmt("%.2e", worst);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.1, 0.3);
    auto sg = [&](int J) {
        DinaParams d;
        for (int j = 0; j < J; ++j) {
            d.s.push_back(u(rng));
            d.g.push_back(u(rng));
        }
        return d;
    };
    struct Merge {
        QMatrix q, qbar;
    };
    const Merge merges[] = {{th::inc_k3("111"), th::inc_k3("011")},
                            {th::inc_k3("111"), th::inc_k3("001")},
                            {th::inc_k5("11111"), th::inc_k5("00111")},
                            {th::inc_k5("11111"), th::inc_k5("00001")}};
    detail += "; (ii)";
    for (const auto& m : merges) {
        auto d = sg(20);
        auto p = dirichlet(std::size_t{1} << m.q.attributes(), 3.0, rng);
        try {
            auto w = incomplete_gamma_merge(m.q, m.qbar, d, p);
            ok = ok && is_certified(w) && w.certified_max_diff < 1e-12 && !q_equivalent(m.q, m.qbar);
            detail += " " + fmt("%.2e", w.certified_max_diff);
        } catch (const Error& e) {
            ok = false;
            detail += std::string(" error: ") + e.what();
        }
    }

    detail += "; (iii)";
    for (const auto& q : {th::two_item_k3(), th::two_item_k5()}) {
        auto theta = th::equal_effects(q);
        std::vector<double> p(theta.classes(), 1.0 / theta.classes());
        try {
            auto ws = gdina_two_item_attr(q, theta, p, 70, rng);
            double w_max = 0;
            int c = 0;
            for (auto& w : ws) {
                w_max = std::max(w_max, w.certified_max_diff);
                c += is_certified(w);
            }
            ok = ok && c == 70;
            detail += " K=" + std::to_string(q.attributes()) + " " + std::to_string(c) + "/70 max " + fmt("%.2e", w_max);
        } catch (const Error& e) {
            ok = false;
            detail += std::string(" error: ") + e.what();
        }
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 120.0;
    return report(3, ok, detail + "; " + fmt("%.1f s", secs));
}

// 4 ---------------------------------------------------------------------------
int criterion4() {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(0.1, 0.3);
    int holds = 0;
    for (int t = 0; t < 100; ++t) {
        DinaParams d;
        for (int j = 0; j < 4; ++j) {
            d.s.push_back(u(rng));
            d.g.push_back(u(rng));
        }
        try {
            dina_q24_two_solutions(d, dirichlet(4, 3.0, rng));
        } catch (const Error& e) {
            holds += e.code() == ErrorCode::ConstraintHolds;
        }
    }
    return report(4, holds >= 99, std::to_string(holds) + "/100 draws raised ConstraintHolds");
}

// 5 ---------------------------------------------------------------------------
int criterion5() {
    auto t0 = Clock::now();
    const auto cands = enumerate_canonical(5, 2);
    const int reps = 10, restarts = 10;
    const std::size_t N = 10000;
    struct Case {
        const char* name;
        QMatrix q;
    };
    const Case cases[] = {{"Q18", th::q18()}, {"Q5", th::q5()}, {"Q10", th::q10()}};
    int hits[3] = {0, 0, 0};
    std::string detail;
    for (int c = 0; c < 3; ++c) {
        auto sampler = default_truth_sampler(cases[c].q);
        const QMatrix truth_canon = canonical_form(cases[c].q);
        for (int r = 0; r < reps; ++r) {
            std::mt19937_64 rng(1000 * (c + 1) + r);
            Model truth = sampler(rng);
            auto data = simulate(truth, N, rng).tabulate();
            auto rep = exhaustive_search(ModelKind::Dina, data, cands, restarts, false, 77 + r);
            if (rep.argmax >= 0 && canonical_form(rep.candidates[rep.argmax].q) == truth_canon) ++hits[c];
        }
        detail += std::string(c ? ", " : "") + cases[c].name + " argmax " + std::to_string(hits[c]) + "/10";
    }
    const double secs = seconds_since(t0);
    const bool ok = hits[0] >= 9 && hits[1] >= 9 && hits[2] <= 2;
    return report(5, ok, detail + ", " + fmt("%.0f s", secs));
}

// 6 ---------------------------------------------------------------------------
int criterion6() {
    auto t0 = Clock::now();
    const QMatrix q = q4x2();
    const std::vector<std::size_t> grid = {100, 1000, 10000};
    const int truths = 30;
    auto rep = mse_experiment(q, default_truth_sampler(q), truths, grid, 20, 606, 10);
    std::vector<std::vector<double>> by_n(grid.size());
    std::vector<double> mse_small(truths), mse_large(truths), dist(truths);
    for (const auto& row : rep.rows) {
        const std::size_t i = std::find(grid.begin(), grid.end(), row.n) - grid.begin();
        by_n[i].push_back(row.mse_p);
        if (i == 0) mse_small[row.truth] = row.mse_p;
        if (i == grid.size() - 1) {
            mse_large[row.truth] = row.mse_p;
            dist[row.truth] = row.constraint_distance;
        }
    }
    std::vector<double> med;
    for (auto& v : by_n) {
        std::sort(v.begin(), v.end());
        med.push_back(v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]));
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < med.size(); ++i) decreasing = decreasing && med[i] < med[i - 1];
    int fast = 0;
    for (int t = 0; t < truths; ++t) fast += mse_large[t] < mse_small[t] / 5.0;
    const double rho = spearman(dist, mse_large);
    const bool ok = decreasing && fast >= 24 && rho < -0.3;
    return report(6, ok,
                  "median MSE(p) " + fmt("%.2e", med[0]) + " > " + fmt("%.2e", med[1]) + " > " + fmt("%.2e", med[2]) +
                      (decreasing ? "" : " (not decreasing)") + ", " + std::to_string(fast) +
                      "/30 truths shrink 5x, spearman " + fmt("%.3f", rho) + ", " + fmt("%.0f s", seconds_since(t0)));
}

// 7 ---------------------------------------------------------------------------
int criterion7() {
    std::mt19937_64 rng(77);
    std::string detail;
    bool ok = true;

    int monotone = 0;
    for (int t = 0; t < 50; ++t) {
        const int K = 1 + t % 3, J = 2 * K + 1 + t % 4;
        auto q = th::random_q(J, K, rng);
        Model truth = t % 2 ? th::random_gdina(q, rng) : th::random_dina(q, rng);
        auto data = simulate(truth, 500, rng).tabulate();
        auto fit = em_fit(q, data, random_init(truth.kind, q, rng));
        bool m = fit.loglik_monotone;
        for (std::size_t i = 1; i < fit.trace.size(); ++i) m = m && fit.trace[i] >= fit.trace[i - 1] - 1e-9;
        monotone += m;
    }
    ok = ok && monotone == 50;
    detail += "EM monotone " + std::to_string(monotone) + "/50";

    double norm = 0;
    for (int t = 0; t < 50; ++t) {
        auto q = th::random_q(2 + t % 8, 1 + t % 4, rng);
        Model m = t % 2 ? th::random_gdina(q, rng) : th::random_dina(q, rng);
        double s = 0;
        for (double v : full_distribution(m)) s += v;
        norm = std::max(norm, std::abs(s - 1.0));
    }
    ok = ok && norm <= 1e-10;
    detail += ", pmf sum err " + fmt("%.1e", norm);

    double dt = 0, det_err = 0;
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int t = 0; t < 20; ++t) {
        const int J = 1 + t % 6;
        auto q = th::random_q(J, 2, rng);
        auto theta = theta_table(th::random_gdina(q, rng));
        std::vector<double> shift(J);
        for (auto& v : shift) v = u(rng);
        auto D = transform_d(shift);
        dt = std::max(dt, (D * build_t(theta) - shift_t(theta, shift)).cwiseAbs().maxCoeff());
        det_err = std::max(det_err, std::abs(std::abs(D.determinant()) - 1.0));
    }
    ok = ok && dt <= 1e-10 && det_err == 0.0;
    detail += ", D*T err " + fmt("%.1e", dt) + ", |det D|-1 " + fmt("%.1e", det_err);

    double embed = 0;
    for (int t = 0; t < 30; ++t) {
        auto q = th::random_q(2 + t % 7, 1 + t % 4, rng);
        Model d = th::random_dina(q, rng);
        Model g = d;
        g.kind = ModelKind::Gdina;
        g.params = dina_to_gdina(std::get<DinaParams>(d.params), q);
        auto a = full_distribution(d), b = full_distribution(g);
        for (std::size_t r = 0; r < a.size(); ++r) embed = std::max(embed, std::abs(a[r] - b[r]));
    }
    ok = ok && embed <= 1e-14;
    detail += ", embedding err " + fmt("%.1e", embed);

    int invariant = 0;
    const int trials = 300;
    for (int t = 0; t < trials; ++t) {
        const int K = 1 + t % 4, J = 1 + t % 9;
        auto q = th::random_q(J, K, rng, 0.45);
        auto p = q.permute_rows(th::random_perm(J, rng)).permute_columns(th::random_perm(K, rng));
        auto a = check_conditions_DE(q), b = check_conditions_DE(p);
        const bool A = check_condition_A(q).ok;
        bool same = A == check_condition_A(p).ok && check_condition_C(q) == check_condition_C(p) &&
                    check_generic_completeness(q).ok == check_generic_completeness(p).ok && a.D == b.D &&
                    a.E == b.E && classify_dina(q).scenario == classify_dina(p).scenario &&
                    classify_gdina(q).scenario == classify_gdina(p).scenario;
        if (A) same = same && check_condition_B(q) == check_condition_B(p);
        invariant += same;
    }
    ok = ok && invariant == trials;
    detail += ", permutation invariance " + std::to_string(invariant) + "/" + std::to_string(trials);
    return report(7, ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance N (1-7)\n");
        return 2;
    }
    const int n = std::atoi(argv[1]);
    try {
        switch (n) {
            case 1: return criterion1();
            case 2: return criterion2();
            case 3: return criterion3();
            case 4: return criterion4();
            case 5: return criterion5();
            case 6: return criterion6();
            case 7: return criterion7();
            default: std::fprintf(stderr, "unknown criterion %d\n", n); return 2;
        }
    } catch (const std::exception& e) {
        return report(n, false, std::string("exception: ") + e.what());
    }
}
