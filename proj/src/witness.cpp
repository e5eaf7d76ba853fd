#include "qident/witness.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "qident/error.hpp"

namespace qident {

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

bool proportions_ok(std::vector<double>& p) {
    for (double& v : p) {
        if (v < 0.0 && v > -1e-15) v = 0.0;
        if (!in_unit(v)) return false;
    }
    return true;
}

// attribute patterns with bit k cleared, in increasing order
std::vector<Pattern> lower_half(int K, int k) {
    std::vector<Pattern> out;
    for (Pattern a = 0; a < (Pattern{1} << K); ++a)
        if (!(a >> k & 1u)) out.push_back(a);
    return out;
}

// alpha' (K-1 bits over attributes other than k) -> full pattern with bit k = 0
Pattern expand(Pattern rest, int k) {
    const Pattern low = rest & ((Pattern{1} << k) - 1);
    return low | ((rest >> k) << (k + 1));
}

WitnessPair finish(WitnessPair pair, const std::vector<double>* truth_dist = nullptr) {
    validate_model(pair.truth, true);
    validate_model(pair.alternative, false);
    const double diff = truth_dist ? certify(pair, *truth_dist) : certify(pair);
    if (!(diff < kCertifyTolerance))
        throw Error(ErrorCode::NotCertified, "distributions differ by " + std::to_string(diff));
    if (!is_certified(pair))
        throw Error(ErrorCode::NotCertified, "alternative coincides with the truth");
    return pair;
}

Model dina_model(const QMatrix& q, const DinaParams& params, const std::vector<double>& p) {
    Model m;
    m.kind = ModelKind::Dina;
    m.q = q;
    m.params = params;
    m.p = p;
    return m;
}

Model gdina_model(const QMatrix& q, const GdinaParams& theta, const std::vector<double>& p) {
    Model m;
    m.kind = ModelKind::Gdina;
    m.q = q;
    m.params = theta;
    m.p = p;
    return m;
}

void check_gdina_input(const QMatrix& q, const GdinaParams& theta, const std::vector<double>& p) {
    Model m = gdina_model(q, theta, p);
    validate_model(m, true);
}

}  // namespace

const char* construction_name(Construction c) {
    switch (c) {
        case Construction::DinaOneItemAttr: return "DinaOneItemAttr";
        case Construction::DinaScenarioA: return "DinaScenarioA";
        case Construction::DinaQ24TwoSolutions: return "DinaQ24TwoSolutions";
        case Construction::GdinaOneItemAttr: return "GdinaOneItemAttr";
        case Construction::GdinaTwoItemAttr: return "GdinaTwoItemAttr";
        case Construction::IncompleteGammaMerge: return "IncompleteGammaMerge";
    }
    return "Unknown";
}

double certify(WitnessPair& pair) {
    if (pair.truth.q.items() > 20) throw Error(ErrorCode::TooLarge, "exact certification needs J <= 20");
    return certify(pair, full_distribution(pair.truth));
}

double certify(WitnessPair& pair, const std::vector<double>& truth_distribution) {
    if (pair.alternative.q.items() > 20) throw Error(ErrorCode::TooLarge, "exact certification needs J <= 20");
    auto alt = full_distribution(pair.alternative);
    if (alt.size() != truth_distribution.size())
        throw Error(ErrorCode::DimensionMismatch, "models have different item counts");
    double diff = 0.0;
    for (std::size_t r = 0; r < alt.size(); ++r) diff = std::max(diff, std::abs(alt[r] - truth_distribution[r]));
    pair.certified_max_diff = diff;
    pair.exact = true;
    return diff;
}

double certify_sampled(WitnessPair& pair, std::size_t samples, std::uint64_t seed) {
    const int J = pair.truth.q.items();
    if (J > 63) throw Error(ErrorCode::TooLarge, "response patterns need J <= 63");
    std::mt19937_64 rng(seed);
    const Response mask = (Response{1} << J) - 1;
    auto ta = theta_table(pair.truth);
    auto tb = theta_table(pair.alternative);
    auto eval = [](const GdinaParams& t, const std::vector<double>& p, Response r) {
        double total = 0.0;
        for (Pattern a = 0; a < t.classes(); ++a) {
            double like = p[a];
            for (int j = 0; j < t.items(); ++j) like *= (r >> j & 1u) ? t(j, a) : 1.0 - t(j, a);
            total += like;
        }
        return total;
    };
    double diff = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        Response r = rng() & mask;
        diff = std::max(diff, std::abs(eval(ta, pair.truth.p, r) - eval(tb, pair.alternative.p, r)));
    }
    pair.certified_max_diff = diff;
    pair.exact = false;
    return diff;
}

double parameter_gap(const Model& a, const Model& b) {
    auto ta = theta_table(a);
    auto tb = theta_table(b);
    if (ta.data().size() != tb.data().size() || a.p.size() != b.p.size())
        throw Error(ErrorCode::DimensionMismatch, "models differ in shape");
    double gap = 0.0;
    for (std::size_t i = 0; i < ta.data().size(); ++i) gap = std::max(gap, std::abs(ta.data()[i] - tb.data()[i]));
    for (std::size_t i = 0; i < a.p.size(); ++i) gap = std::max(gap, std::abs(a.p[i] - b.p[i]));
    return gap;
}

bool is_certified(const WitnessPair& pair) {
    if (!(pair.certified_max_diff >= 0.0 && pair.certified_max_diff < kCertifyTolerance)) return false;
    if (!q_equivalent(pair.truth.q, pair.alternative.q)) return true;
    return parameter_gap(pair.truth, pair.alternative) > kDistinctFloor;
}

WitnessPair dina_one_item_attr(const QMatrix& q, const DinaParams& params, const std::vector<double>& p,
                               double cbar) {
    validate_model(dina_model(q, params, p), true);
    const int K = q.attributes();
    int k = -1, j = -1;
    for (int kk = 0; kk < K && k < 0; ++kk) {
        if (q.column_sum(kk) != 1) continue;
        for (int jj = 0; jj < q.items(); ++jj)
            if (q.row(jj) == (Pattern{1} << kk)) {
                k = kk;
                j = jj;
            }
    }
    if (k < 0) throw Error(ErrorCode::WrongShape, "no attribute is required only by one single-attribute item");
    const double c = params.c(j), g = params.g[j];
    if (!(cbar > g && cbar < 1.0) || cbar == c)
        throw Error(ErrorCode::InvalidCbar, "c-bar must lie in (g, 1) and differ from 1 - s");
    // Item j sees only attribute k: matching g p0 + c p1 with the same g forces
    // the capable share to scale by (c - g) / (cbar - g).
    const double ratio = (c - g) / (cbar - g);
    std::vector<double> pbar = p;
    const Pattern ek = Pattern{1} << k;
    for (Pattern a0 : lower_half(K, k)) {
        pbar[a0 | ek] = ratio * p[a0 | ek];
        pbar[a0] = p[a0] + (1.0 - ratio) * p[a0 | ek];
    }
    if (!proportions_ok(pbar)) throw Error(ErrorCode::InvalidCbar, "c-bar pushes proportions outside [0,1]");
    DinaParams alt = params;
    alt.s[j] = 1.0 - cbar;
    WitnessPair pair;
    pair.truth = dina_model(q, params, p);
    pair.alternative = dina_model(q, alt, pbar);
    pair.construction = Construction::DinaOneItemAttr;
    pair.pivot_attributes = {k};
    pair.pivot_items = {j};
    return finish(std::move(pair));
}

WitnessPair dina_scenario_a(const QMatrix& q, const DinaParams& params, const std::vector<double>& p,
                            double gbar) {
    validate_model(dina_model(q, params, p), true);
    const int K = q.attributes();
    const Pattern full = (Pattern{1} << K) - 1;
    int k = -1, j1 = -1, j2 = -1;
    for (int kk = 0; kk < K && k < 0; ++kk) {
        if (q.column_sum(kk) != 2) continue;
        int a = -1, b = -1;
        for (int jj = 0; jj < q.items(); ++jj)
            if (q.at(jj, kk)) (a < 0 ? a : b) = jj;
        const Pattern ek = Pattern{1} << kk;
        if (q.row(a) == ek && q.row(b) == full) std::tie(k, j1, j2) = std::tuple{kk, a, b};
        else if (q.row(b) == ek && q.row(a) == full) std::tie(k, j1, j2) = std::tuple{kk, b, a};
    }
    if (k < 0) throw Error(ErrorCode::WrongShape, "Q does not have the (1 0'; 1 1'; 0 Q*) form");
    const double c1 = params.c(j1), g1 = params.g[j1];
    const double c2 = params.c(j2), g2 = params.g[j2];
    if (!(gbar > 0.0 && gbar < c1)) throw Error(ErrorCode::InvalidGbar, "g-bar must lie in (0, c1)");
    const Pattern ek = Pattern{1} << k;
    std::vector<double> pbar = p;
    const double ratio = (g1 - c1) / (gbar - c1);
    for (Pattern a0 : lower_half(K, k)) {
        pbar[a0] = p[a0] * ratio;
        pbar[a0 | ek] = p[a0] + p[a0 | ek] - pbar[a0];
    }
    if (!proportions_ok(pbar)) throw Error(ErrorCode::InvalidGbar, "g-bar pushes proportions outside [0,1]");
    const Pattern f0 = full & ~ek;
    if (pbar[full] <= 0.0) throw Error(ErrorCode::InvalidGbar, "full-mastery proportion vanishes");
    const double c2bar = (g2 * (p[f0] - pbar[f0]) + c2 * p[full]) / pbar[full];
    if (!(c2bar > g2 && c2bar < 1.0)) throw Error(ErrorCode::InvalidGbar, "solved c2-bar leaves (g2, 1)");
    DinaParams alt = params;
    alt.g[j1] = gbar;
    alt.s[j2] = 1.0 - c2bar;
    WitnessPair pair;
    pair.truth = dina_model(q, params, p);
    pair.alternative = dina_model(q, alt, pbar);
    pair.construction = Construction::DinaScenarioA;
    pair.pivot_attributes = {k};
    pair.pivot_items = {j1, j2};
    return finish(std::move(pair));
}

QMatrix q4x2() { return QMatrix({{1, 0}, {0, 1}, {1, 0}, {0, 1}}); }

Model q24_factorized_alternative(const DinaParams& params, const std::vector<double>& p, double guess_shift) {
    // With independent attributes the response vector splits into two blocks,
    // items (1,3) on attribute 1 and items (2,4) on attribute 2, each a
    // two-item binary latent class model. Moving both guessing values of a
    // block and re-solving its prevalence and capable probabilities keeps the
    // block's 2x2 table, hence the whole distribution.
    const double pi[2] = {p[1] + p[3], p[2] + p[3]};
    const int block[2][2] = {{0, 2}, {1, 3}};
    DinaParams alt = params;
    double pibar[2];
    for (int b = 0; b < 2; ++b) {
        const int ia = block[b][0], ib = block[b][1];
        const double ga = params.g[ia], gb = params.g[ib];
        const double ca = params.c(ia), cb = params.c(ib);
        const double gba = ga + guess_shift, gbb = gb + guess_shift;
        const double ma = ga + pi[b] * (ca - ga), mb = gb + pi[b] * (cb - gb);
        const double cross = (1.0 - pi[b]) * (ga - gba) * (gb - gbb) + pi[b] * (ca - gba) * (cb - gbb);
        if (cross == 0.0) throw Error(ErrorCode::InvalidGbar, "degenerate block moment");
        pibar[b] = (ma - gba) * (mb - gbb) / cross;
        if (!(pibar[b] > 0.0 && pibar[b] < 1.0)) throw Error(ErrorCode::InvalidGbar, "solved prevalence leaves (0,1)");
        const double cba = gba + (ma - gba) / pibar[b];
        const double cbb = gbb + (mb - gbb) / pibar[b];
        if (!(gba > 0.0 && gbb > 0.0 && cba > gba && cbb > gbb && cba < 1.0 && cbb < 1.0))
            throw Error(ErrorCode::InvalidGbar, "solved item parameters are not valid DINA values");
        alt.g[ia] = gba;
        alt.g[ib] = gbb;
        alt.s[ia] = 1.0 - cba;
        alt.s[ib] = 1.0 - cbb;
    }
    std::vector<double> pbar(4);
    for (Pattern a = 0; a < 4; ++a)
        pbar[a] = ((a & 1u) ? pibar[0] : 1.0 - pibar[0]) * ((a & 2u) ? pibar[1] : 1.0 - pibar[1]);
    return dina_model(q4x2(), alt, pbar);
}

std::vector<WitnessPair> dina_q24_two_solutions(const DinaParams& params, const std::vector<double>& p,
                                                const std::vector<double>& guess_shifts) {
    Model truth = dina_model(q4x2(), params, p);
    validate_model(truth, true);
    // p index: bit 0 = attribute 1, so p[1] = p10, p[2] = p01
    if (std::abs(p[2] * p[1] - p[0] * p[3]) > 1e-12)
        throw Error(ErrorCode::ConstraintHolds, "p01 p10 != p00 p11, the model is identifiable");
    const auto truth_dist = full_distribution(truth);
    std::vector<WitnessPair> out;
    for (double shift : guess_shifts) {
        if (shift == 0.0) continue;
        WitnessPair pair;
        pair.truth = truth;
        try {
            pair.alternative = q24_factorized_alternative(params, p, shift);
        } catch (const Error&) {
            continue;
        }
        pair.construction = Construction::DinaQ24TwoSolutions;
        pair.pivot_attributes = {0, 1};
        pair.pivot_items = {0, 1, 2, 3};
        out.push_back(finish(std::move(pair), &truth_dist));
    }
    if (out.empty()) throw Error(ErrorCode::InvalidGbar, "no guessing shift gives a valid alternative");
    return out;
}

Model solve_gdina_one_item_attr(const QMatrix& q, const GdinaParams& theta, const std::vector<double>& p,
                                const std::vector<double>& free_row) {
    const int K = q.attributes();
    int k = -1, j = -1;
    for (int kk = 0; kk < K && k < 0; ++kk)
        if (q.column_sum(kk) == 1) {
            k = kk;
            for (int jj = 0; jj < q.items(); ++jj)
                if (q.at(jj, kk)) j = jj;
        }
    if (k < 0) throw Error(ErrorCode::WrongShape, "no attribute is required by a single item");
    if (free_row.size() != theta.classes()) throw Error(ErrorCode::DimensionMismatch, "free row needs 2^K values");
    const Pattern ek = Pattern{1} << k;
    std::vector<double> pbar = p;
    for (Pattern a0 : lower_half(K, k)) {
        const Pattern a1 = a0 | ek;
        const double lo = free_row[a0], hi = free_row[a1];
        if (std::abs(hi - lo) < 1e-12) throw Error(ErrorCode::InvalidFreeValues, "free values coincide");
        pbar[a1] = ((theta(j, a0) - lo) * p[a0] + (theta(j, a1) - lo) * p[a1]) / (hi - lo);
        pbar[a0] = p[a0] + p[a1] - pbar[a1];
    }
    QMatrix qbar = q;
    for (int kk = 0; kk < K; ++kk) qbar.set(j, kk, 1);
    GdinaParams alt = theta;
    for (Pattern a = 0; a < theta.classes(); ++a) alt(j, a) = free_row[a];
    return gdina_model(qbar, alt, pbar);
}

WitnessPair gdina_one_item_attr(const QMatrix& q, const GdinaParams& theta, const std::vector<double>& p,
                                const std::vector<double>& free_row) {
    check_gdina_input(q, theta, p);
    WitnessPair pair;
    pair.truth = gdina_model(q, theta, p);
    pair.alternative = solve_gdina_one_item_attr(q, theta, p, free_row);
    if (!proportions_ok(pair.alternative.p))
        throw Error(ErrorCode::InvalidFreeValues, "solved proportions leave [0,1]");
    const auto& alt = std::get<GdinaParams>(pair.alternative.params);
    for (double v : alt.data())
        if (!(v > 0.0 && v < 1.0)) throw Error(ErrorCode::InvalidFreeValues, "free values leave (0,1)");
    if (!monotone_ok(alt, pair.alternative.q))
        throw Error(ErrorCode::InvalidFreeValues, "alternative violates monotonicity");
    pair.construction = Construction::GdinaOneItemAttr;
    for (int kk = 0; kk < q.attributes(); ++kk)
        if (q.column_sum(kk) == 1) {
            pair.pivot_attributes = {kk};
            break;
        }
    for (int jj = 0; jj < q.items(); ++jj)
        if (q.at(jj, pair.pivot_attributes[0])) pair.pivot_items = {jj};
    return finish(std::move(pair));
}

namespace {

struct TwoItemPivot {
    int k = -1, j1 = -1, j2 = -1;
};

TwoItemPivot find_two_item_pivot(const QMatrix& q) {
    TwoItemPivot piv;
    for (int kk = 0; kk < q.attributes(); ++kk) {
        if (q.column_sum(kk) != 2) continue;
        piv.k = kk;
        for (int jj = 0; jj < q.items(); ++jj)
            if (q.at(jj, kk)) (piv.j1 < 0 ? piv.j1 : piv.j2) = jj;
        return piv;
    }
    throw Error(ErrorCode::WrongShape, "no attribute is required by exactly two items");
}

std::string validate_two_item(const Model& alt) {
    auto pbar = alt.p;
    if (!proportions_ok(pbar)) return "solved proportions leave [0,1]";
    const auto& t = std::get<GdinaParams>(alt.params);
    for (double v : t.data())
        if (!(v > 0.0 && v < 1.0) || !std::isfinite(v)) return "solved item parameters leave (0,1)";
    if (!monotone_ok(t, alt.q)) return "alternative violates monotonicity";
    return {};
}

}  // namespace

Model solve_gdina_two_item_attr(const QMatrix& q, const GdinaParams& theta, const std::vector<double>& p,
                                const TwoItemFreeValues& free) {
    const int K = q.attributes();
    const auto piv = find_two_item_pivot(q);
    const std::size_t half = theta.classes() / 2;
    if (free.first.size() != half || free.second.size() != half)
        throw Error(ErrorCode::DimensionMismatch, "free values need 2^(K-1) entries per item");
    const Pattern ek = Pattern{1} << piv.k;
    GdinaParams alt = theta;
    std::vector<double> pbar = p;
    for (Pattern rest = 0; rest < half; ++rest) {
        const Pattern a0 = expand(rest, piv.k), a1 = a0 | ek;
        const double a = free.first[rest], b = free.second[rest];
        const double p0 = p[a0], p1 = p[a1];
        const double t10 = theta(piv.j1, a0), t11 = theta(piv.j1, a1);
        const double t20 = theta(piv.j2, a0), t21 = theta(piv.j2, a1);
        // centred first and cross moments of the two items inside this block
        const double m1 = (t10 - a) * p0 + (t11 - a) * p1;
        const double m2 = (t20 - b) * p0 + (t21 - b) * p1;
        const double m12 = (t10 - a) * (t20 - b) * p0 + (t11 - a) * (t21 - b) * p1;
        if (std::abs(m1) < 1e-14 || std::abs(m2) < 1e-14 || std::abs(m12) < 1e-14)
            throw Error(ErrorCode::InvalidFreeValues, "vanishing denominator");
        const double x = t10 + (t11 - t10) * (t21 - b) * p1 / m2;
        const double y = t20 + (t21 - t20) * (t11 - a) * p1 / m1;
        pbar[a1] = m2 / (y - b);
        pbar[a0] = p0 + p1 - pbar[a1];
        alt(piv.j1, a0) = a;
        alt(piv.j1, a1) = x;
        alt(piv.j2, a0) = b;
        alt(piv.j2, a1) = y;
    }
    QMatrix qbar = q;
    for (int kk = 0; kk < K; ++kk) {
        qbar.set(piv.j1, kk, 1);
        qbar.set(piv.j2, kk, 1);
    }
    return gdina_model(qbar, alt, pbar);
}

WitnessPair gdina_two_item_attr(const QMatrix& q, const GdinaParams& theta, const std::vector<double>& p,
                                const TwoItemFreeValues& free) {
    check_gdina_input(q, theta, p);
    WitnessPair pair;
    pair.truth = gdina_model(q, theta, p);
    pair.alternative = solve_gdina_two_item_attr(q, theta, p, free);
    if (auto why = validate_two_item(pair.alternative); !why.empty())
        throw Error(ErrorCode::InvalidFreeValues, why);
    const auto piv = find_two_item_pivot(q);
    pair.construction = Construction::GdinaTwoItemAttr;
    pair.pivot_attributes = {piv.k};
    pair.pivot_items = {piv.j1, piv.j2};
    return finish(std::move(pair));
}

std::vector<WitnessPair> gdina_two_item_attr(const QMatrix& q, const GdinaParams& theta,
                                             const std::vector<double>& p, int count, std::mt19937_64& rng,
                                             double spread) {
    check_gdina_input(q, theta, p);
    const auto piv = find_two_item_pivot(q);
    const std::size_t half = theta.classes() / 2;
    Model truth = gdina_model(q, theta, p);
    const auto truth_dist = full_distribution(truth);
    std::uniform_real_distribution<double> unif(-spread, spread);
    std::vector<WitnessPair> out;
    long attempts = 0;
    const long max_attempts = 10000L * std::max(count, 1);
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > max_attempts)
            throw Error(ErrorCode::InvalidFreeValues, "could not draw enough valid free values");
        TwoItemFreeValues free;
        for (Pattern rest = 0; rest < half; ++rest) {
            const Pattern a0 = expand(rest, piv.k);
            free.first.push_back(theta(piv.j1, a0) + unif(rng));
            free.second.push_back(theta(piv.j2, a0) + unif(rng));
        }
        Model alt;
        try {
            alt = solve_gdina_two_item_attr(q, theta, p, free);
        } catch (const Error&) {
            continue;
        }
        if (!validate_two_item(alt).empty()) continue;
        WitnessPair pair;
        pair.truth = truth;
        pair.alternative = std::move(alt);
        pair.construction = Construction::GdinaTwoItemAttr;
        pair.pivot_attributes = {piv.k};
        pair.pivot_items = {piv.j1, piv.j2};
        out.push_back(finish(std::move(pair), &truth_dist));
    }
    return out;
}

std::vector<double> merge_proportions(const QMatrix& q, const QMatrix& qbar, const std::vector<double>& p) {
    if (q.items() != qbar.items() || q.attributes() != qbar.attributes())
        throw Error(ErrorCode::ShapeMismatch, "Q and Q-bar differ in shape");
    const auto gq = ideal_response_columns(q);
    const auto gbar = ideal_response_columns(qbar);
    std::vector<double> pbar(p.size(), 0.0);
    for (Pattern a = 0; a < gq.size(); ++a) {
        Pattern target = a;
        if (gbar[a] != gq[a]) {
            auto it = std::find(gbar.begin(), gbar.end(), gq[a]);
            if (it == gbar.end())
                throw Error(ErrorCode::NotSubsumed, "ideal response of class " + pattern_string(a, q.attributes()) +
                                                        " is not produced under Q-bar");
            target = static_cast<Pattern>(it - gbar.begin());
        }
        pbar[target] += p[a];
    }
    return pbar;
}

WitnessPair incomplete_gamma_merge(const QMatrix& q, const QMatrix& qbar, const DinaParams& params,
                                   const std::vector<double>& p) {
    validate_model(dina_model(q, params, p), true);
    WitnessPair pair;
    pair.truth = dina_model(q, params, p);
    pair.alternative = dina_model(qbar, params, merge_proportions(q, qbar, p));
    pair.construction = Construction::IncompleteGammaMerge;
    for (int j = 0; j < q.items(); ++j)
        if (q.row(j) != qbar.row(j)) pair.pivot_items.push_back(j);
    return finish(std::move(pair));
}

}  // namespace qident
