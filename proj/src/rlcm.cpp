#include "qident/rlcm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include "qident/error.hpp"

namespace qident {

const char* model_name(ModelKind m) {
    switch (m) {
        case ModelKind::Dina: return "dina";
        case ModelKind::Dino: return "dino";
        case ModelKind::Gdina: return "gdina";
    }
    return "dina";
}

ModelKind parse_model(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "dina") return ModelKind::Dina;
    if (s == "dino") return ModelKind::Dino;
    if (s == "gdina") return ModelKind::Gdina;
    throw Error(ErrorCode::InvalidParameters, "unknown model '" + name + "'");
}

GdinaParams::GdinaParams(int items, int attributes, double fill) : J_(items), K_(attributes) {
    if (attributes > 20) throw Error(ErrorCode::TooLarge, "saturated table needs K <= 20");
    theta_.assign(static_cast<std::size_t>(items) << attributes, fill);
}

double theta_dina(const DinaParams& params, const QMatrix& q, int j, Pattern alpha) {
    return covers(alpha, q.row(j)) ? 1.0 - params.s[j] : params.g[j];
}

double theta_dino(const DinaParams& params, const QMatrix& q, int j, Pattern alpha) {
    return (alpha & q.row(j)) ? 1.0 - params.s[j] : params.g[j];
}

GdinaParams dina_to_gdina(const DinaParams& params, const QMatrix& q, bool dino) {
    validate_dina(params, q.items());
    GdinaParams t(q.items(), q.attributes());
    for (int j = 0; j < q.items(); ++j)
        for (Pattern a = 0; a < t.classes(); ++a)
            t(j, a) = dino ? theta_dino(params, q, j, a) : theta_dina(params, q, j, a);
    return t;
}

GdinaParams theta_table(const Model& m) {
    if (m.kind == ModelKind::Gdina) {
        const auto* t = std::get_if<GdinaParams>(&m.params);
        if (!t) throw Error(ErrorCode::InvalidParameters, "GDINA model needs a theta table");
        if (t->items() != m.q.items() || t->attributes() != m.q.attributes())
            throw Error(ErrorCode::DimensionMismatch, "theta table does not match Q");
        return *t;
    }
    const auto* d = std::get_if<DinaParams>(&m.params);
    if (!d) throw Error(ErrorCode::InvalidParameters, "DINA/DINO model needs s and g");
    return dina_to_gdina(*d, m.q, m.kind == ModelKind::Dino);
}

GdinaParams beta_to_theta(const BetaTable& beta, const QMatrix& q) {
    const int J = q.items();
    if (static_cast<int>(beta.size()) != J) throw Error(ErrorCode::DimensionMismatch, "beta rows != J");
    GdinaParams t(J, q.attributes());
    const std::size_t n = t.classes();
    for (int j = 0; j < J; ++j) {
        if (beta[j].size() != n) throw Error(ErrorCode::DimensionMismatch, "beta row length != 2^K");
        std::vector<double> f = beta[j];
        for (Pattern S = 0; S < n; ++S)
            if (f[S] != 0.0 && !covers(q.row(j), S))
                throw Error(ErrorCode::IllegalCoefficient,
                            "item " + std::to_string(j + 1) + " has an effect outside its q-vector");
        // zeta transform: theta(a) = sum of beta(S) over S inside a
        for (int k = 0; k < q.attributes(); ++k)
            for (Pattern a = 0; a < n; ++a)
                if (a >> k & 1u) f[a] += f[a ^ (Pattern{1} << k)];
        for (Pattern a = 0; a < n; ++a) t(j, a) = f[a];
    }
    return t;
}

BetaTable theta_to_beta(const GdinaParams& theta, const QMatrix& q) {
    const std::size_t n = theta.classes();
    BetaTable beta(theta.items(), std::vector<double>(n));
    for (int j = 0; j < theta.items(); ++j) {
        std::vector<double> f(theta.row(j), theta.row(j) + n);
        for (int k = 0; k < theta.attributes(); ++k)
            for (Pattern a = 0; a < n; ++a)
                if (a >> k & 1u) f[a] -= f[a ^ (Pattern{1} << k)];
        for (Pattern S = 0; S < n; ++S) beta[j][S] = covers(q.row(j), S) ? f[S] : 0.0;
    }
    return beta;
}

void validate_dina(const DinaParams& params, int items) {
    if (params.items() != items || static_cast<int>(params.g.size()) != items)
        throw Error(ErrorCode::DimensionMismatch, "s and g must have one entry per item");
    for (int j = 0; j < items; ++j) {
        const double s = params.s[j], g = params.g[j];
        if (!(s > 0.0 && s < 1.0 && g > 0.0 && g < 1.0))
            throw Error(ErrorCode::InvalidParameters, "s and g must lie in (0,1)");
    }
}

bool dina_monotone_ok(const DinaParams& params) {
    for (int j = 0; j < params.items(); ++j)
        if (!(1.0 - params.s[j] > params.g[j])) return false;
    return true;
}

void validate_proportions(const std::vector<double>& p, int attributes, bool strict) {
    if (p.size() != (std::size_t{1} << attributes))
        throw Error(ErrorCode::DimensionMismatch, "p must have 2^K entries");
    double sum = 0.0;
    for (double v : p) {
        if (strict ? !(v > 0.0 && v <= 1.0) : !(v >= 0.0 && v <= 1.0))
            throw Error(ErrorCode::InvalidParameters, "proportions out of range");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw Error(ErrorCode::InvalidParameters, "proportions must sum to 1");
}

bool gdina_equality_ok(const GdinaParams& theta, const QMatrix& q, double tol) {
    for (int j = 0; j < theta.items(); ++j)
        for (Pattern a = 0; a < theta.classes(); ++a)
            if (std::abs(theta(j, a) - theta(j, a & q.row(j))) > tol) return false;
    return true;
}

bool monotone_ok(const GdinaParams& theta, const QMatrix& q) {
    for (int j = 0; j < theta.items(); ++j) {
        double lo_capable = 2.0, hi_other = -1.0;
        for (Pattern a = 0; a < theta.classes(); ++a) {
            if (covers(a, q.row(j))) lo_capable = std::min(lo_capable, theta(j, a));
            else hi_other = std::max(hi_other, theta(j, a));
        }
        if (hi_other >= 0.0 && !(lo_capable > hi_other)) return false;
    }
    return true;
}

bool stringent_ok(const GdinaParams& theta, const QMatrix& q) {
    for (int j = 0; j < theta.items(); ++j) {
        const Pattern qj = q.row(j);
        // cells are subsets of q_j; comparing each cell with its one-bit-smaller
        // neighbours covers every strict containment by transitivity
        for (Pattern S = qj;; S = (S - 1) & qj) {
            for (Pattern rest = S; rest; rest &= rest - 1) {
                Pattern b = rest & (~rest + 1);
                if (!(theta(j, S) > theta(j, S ^ b))) return false;
            }
            if (S == 0) break;
        }
    }
    return true;
}

void validate_model(const Model& m, bool strict_p) {
    validate_proportions(m.p, m.q.attributes(), strict_p);
    if (m.kind == ModelKind::Gdina) {
        auto t = theta_table(m);
        for (double v : t.data())
            if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::InvalidParameters, "theta outside [0,1]");
        if (!gdina_equality_ok(t, m.q, 1e-12))
            throw Error(ErrorCode::InvalidParameters, "theta depends on attributes outside q_j");
    } else {
        const auto* d = std::get_if<DinaParams>(&m.params);
        if (!d) throw Error(ErrorCode::InvalidParameters, "DINA/DINO model needs s and g");
        validate_dina(*d, m.q.items());
    }
}

double pmf(const Model& m, Response r) {
    auto t = theta_table(m);
    double total = 0.0;
    for (Pattern a = 0; a < t.classes(); ++a) {
        double like = m.p[a];
        for (int j = 0; j < t.items(); ++j) like *= (r >> j & 1u) ? t(j, a) : 1.0 - t(j, a);
        total += like;
    }
    return total;
}

std::vector<double> full_distribution(const GdinaParams& theta, const std::vector<double>& p) {
    const int J = theta.items();
    if (J > 24) throw Error(ErrorCode::TooLarge, "full distribution needs J <= 24");
    const std::size_t n = std::size_t{1} << J;
    std::vector<double> total(n, 0.0), cond(n);
    for (Pattern a = 0; a < theta.classes(); ++a) {
        if (p[a] == 0.0) continue;
        cond[0] = p[a];
        for (int j = 0; j < J; ++j) {
            const std::size_t half = std::size_t{1} << j;
            const double th = theta(j, a);
            for (std::size_t r = 0; r < half; ++r) {
                cond[r + half] = cond[r] * th;
                cond[r] *= 1.0 - th;
            }
        }
        for (std::size_t r = 0; r < n; ++r) total[r] += cond[r];
    }
    return total;
}

std::vector<double> full_distribution(const Model& m) {
    if (m.q.items() > 24) throw Error(ErrorCode::TooLarge, "full distribution needs J <= 24");
    return full_distribution(theta_table(m), m.p);
}

double CountTable::total() const { return std::accumulate(counts.begin(), counts.end(), 0.0); }

CountTable Dataset::tabulate() const {
    std::map<Response, double> m;
    for (auto r : responses) m[r] += 1.0;
    CountTable t;
    t.items = items;
    for (const auto& [r, c] : m) {
        t.patterns.push_back(r);
        t.counts.push_back(c);
    }
    return t;
}

Dataset simulate(const Model& m, std::size_t n, std::mt19937_64& rng) {
    auto t = theta_table(m);
    validate_proportions(m.p, m.q.attributes(), false);
    Dataset d;
    d.items = m.q.items();
    d.responses.reserve(n);
    std::vector<double> cdf(m.p.size());
    std::partial_sum(m.p.begin(), m.p.end(), cdf.begin());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double u = unif(rng) * cdf.back();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        Pattern a = static_cast<Pattern>(std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1));
        Response r = 0;
        for (int j = 0; j < d.items; ++j)
            if (unif(rng) < t(j, a)) r |= Response{1} << j;
        d.responses.push_back(r);
    }
    return d;
}

Dataset simulate(const Model& m, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return simulate(m, n, rng);
}

}  // namespace qident
