#include "qident/estimate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "qident/error.hpp"
#include "qident/parallel.hpp"

namespace qident {

namespace {

std::mt19937_64 make_rng(std::initializer_list<std::uint64_t> parts) {
    std::vector<std::uint32_t> words;
    for (auto v : parts) {
        words.push_back(static_cast<std::uint32_t>(v));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Posterior weights w[r * C + a] and the log-likelihood at (theta, p).
double e_step(const GdinaParams& t, const std::vector<double>& p, const CountTable& d, std::vector<double>& w) {
    const std::size_t C = t.classes();
    const int J = t.items();
    w.resize(d.patterns.size() * C);
    double ll = 0.0;
    for (std::size_t i = 0; i < d.patterns.size(); ++i) {
        const Response r = d.patterns[i];
        double* wi = w.data() + i * C;
        double sum = 0.0;
        for (Pattern a = 0; a < C; ++a) {
            double like = p[a];
            for (int j = 0; j < J; ++j) like *= (r >> j & 1u) ? t(j, a) : 1.0 - t(j, a);
            wi[a] = like;
            sum += like;
        }
        if (!(sum > 0.0)) {
            ll = -std::numeric_limits<double>::infinity();
            for (Pattern a = 0; a < C; ++a) wi[a] = 1.0 / static_cast<double>(C);
            continue;
        }
        ll += d.counts[i] * std::log(sum);
        for (Pattern a = 0; a < C; ++a) wi[a] /= sum;
    }
    return ll;
}

double clampv(double v, double lo) { return std::clamp(v, lo, 1.0 - lo); }

void check_data(const QMatrix& q, const CountTable& data) {
    if (data.items != q.items()) throw Error(ErrorCode::DimensionMismatch, "data has a different item count than Q");
    if (data.patterns.empty() || !(data.total() > 0.0)) throw Error(ErrorCode::EmptyData, "no responses");
}

}  // namespace

std::vector<double> dirichlet(std::size_t n, double alpha, std::mt19937_64& rng) {
    std::gamma_distribution<double> gam(alpha, 1.0);
    std::vector<double> v(n);
    double sum = 0.0;
    for (auto& x : v) sum += (x = std::max(gam(rng), 1e-300));
    for (auto& x : v) x /= sum;
    return v;
}

double log_likelihood(const Model& m, const CountTable& data) {
    check_data(m.q, data);
    std::vector<double> w;
    return e_step(theta_table(m), m.p, data, w);
}

Model random_init(ModelKind kind, const QMatrix& q, std::mt19937_64& rng) {
    Model m;
    m.kind = kind;
    m.q = q;
    const int J = q.items();
    if (kind == ModelKind::Gdina) {
        GdinaParams t(J, q.attributes());
        std::uniform_real_distribution<double> unif(0.05, 0.95);
        for (int j = 0; j < J; ++j) {
            const Pattern qj = q.row(j);
            std::vector<Pattern> cells;
            for (Pattern S = qj;; S = (S - 1) & qj) {
                cells.push_back(S);
                if (S == 0) break;
            }
            std::sort(cells.begin(), cells.end(), [](Pattern a, Pattern b) {
                return std::popcount(a) != std::popcount(b) ? std::popcount(a) < std::popcount(b) : a < b;
            });
            std::vector<double> vals(cells.size());
            for (auto& v : vals) v = unif(rng);
            std::sort(vals.begin(), vals.end());
            std::vector<double> cell_value(t.classes());
            for (std::size_t i = 0; i < cells.size(); ++i) cell_value[cells[i]] = vals[i];
            for (Pattern a = 0; a < t.classes(); ++a) t(j, a) = cell_value[a & qj];
        }
        m.params = t;
    } else {
        std::uniform_real_distribution<double> unif(0.05, 0.35);
        DinaParams d;
        for (int j = 0; j < J; ++j) {
            d.s.push_back(unif(rng));
            d.g.push_back(unif(rng));
        }
        m.params = d;
    }
    m.p = dirichlet(std::size_t{1} << q.attributes(), 1.0, rng);
    return m;
}

FitResult em_fit(const QMatrix& q, const CountTable& data, const Model& init, const EmOptions& options) {
    check_data(q, data);
    if (init.q != q) throw Error(ErrorCode::DimensionMismatch, "initial model uses a different Q");
    const int J = q.items();
    const std::size_t C = std::size_t{1} << q.attributes();
    const ModelKind kind = init.kind;
    const double lo = options.clamp;

    Model cur = init;
    GdinaParams t = theta_table(cur);
    std::vector<double> w;
    double ll = e_step(t, cur.p, data, w);

    // capable[j * C + a] for DINA/DINO gates
    std::vector<char> capable(J * C);
    for (int j = 0; j < J; ++j)
        for (Pattern a = 0; a < C; ++a)
            capable[j * C + a] = kind == ModelKind::Dino ? (a & q.row(j)) != 0 : covers(a, q.row(j));

    FitResult res;
    res.trace.push_back(ll);
    std::vector<double> mass(C), num(J * C), den(J * C);
    for (int it = 1; it <= options.max_iter; ++it) {
        std::fill(mass.begin(), mass.end(), 0.0);
        std::fill(num.begin(), num.end(), 0.0);
        std::fill(den.begin(), den.end(), 0.0);
        for (std::size_t i = 0; i < data.patterns.size(); ++i) {
            const Response r = data.patterns[i];
            const double n = data.counts[i];
            const double* wi = w.data() + i * C;
            for (Pattern a = 0; a < C; ++a) {
                const double m = n * wi[a];
                mass[a] += m;
                for (int j = 0; j < J; ++j) {
                    // GDINA pools by cell a & q_j, DINA/DINO by the gate
                    const std::size_t slot = kind == ModelKind::Gdina ? j * C + (a & q.row(j))
                                                                       : j * C + capable[j * C + a];
                    den[slot] += m;
                    if (r >> j & 1u) num[slot] += m;
                }
            }
        }
        const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
        for (Pattern a = 0; a < C; ++a) cur.p[a] = mass[a] / total;
        if (kind == ModelKind::Gdina) {
            auto& th = std::get<GdinaParams>(cur.params);
            for (int j = 0; j < J; ++j)
                for (Pattern a = 0; a < C; ++a) {
                    const std::size_t cell = j * C + (a & q.row(j));
                    if (den[cell] > 0.0) th(j, a) = clampv(num[cell] / den[cell], lo);
                }
        } else {
            auto& d = std::get<DinaParams>(cur.params);
            for (int j = 0; j < J; ++j) {
                if (den[j * C + 1] > 0.0) d.s[j] = clampv(1.0 - num[j * C + 1] / den[j * C + 1], lo);
                if (den[j * C] > 0.0) d.g[j] = clampv(num[j * C] / den[j * C], lo);
            }
        }
        t = theta_table(cur);
        const double next = e_step(t, cur.p, data, w);
        res.trace.push_back(next);
        if (next < ll - 1e-9) res.loglik_monotone = false;
        res.iterations = it;
        const double inc = next - ll;
        ll = next;
        if (inc < options.tol) {
            res.converged = true;
            break;
        }
    }
    res.model = cur;
    res.loglik = ll;
    res.monotonicity_ok = monotone_ok(t, q);
    if (kind == ModelKind::Gdina) {
        res.stringent_ok = stringent_ok(t, q);
    } else {
        // conjunctive/disjunctive tables tie every non-capable cell, so the
        // stringent order reduces to 1 - s > g
        res.stringent_ok = dina_monotone_ok(std::get<DinaParams>(cur.params));
        res.monotonicity_ok = res.stringent_ok;
    }
    return res;
}

FitResult multistart_fit(ModelKind kind, const QMatrix& q, const CountTable& data, int restarts,
                         std::uint64_t seed, const EmOptions& options, int threads) {
    check_data(q, data);
    if (restarts < 1) throw Error(ErrorCode::InvalidParameters, "restarts must be positive");
    std::vector<FitResult> fits(restarts);
    parallel_for(restarts, threads, [&](std::size_t i) {
        auto rng = make_rng({seed, static_cast<std::uint64_t>(i)});
        Model init = random_init(kind, q, rng);
        fits[i] = em_fit(q, data, init, options);
        fits[i].restart = static_cast<int>(i);
    });
    // label-flipped twins (g and 1-s swapped) tie in likelihood; keep fits inside the monotone space when any exist
    const bool any_mono = std::any_of(fits.begin(), fits.end(), [](const FitResult& f) { return f.monotonicity_ok; });
    std::size_t best = fits.size();
    for (std::size_t i = 0; i < fits.size(); ++i) {
        if (any_mono && !fits[i].monotonicity_ok) continue;
        if (best == fits.size() || fits[i].loglik > fits[best].loglik) best = i;
    }
    return fits[best];
}

SearchReport exhaustive_search(ModelKind kind, const CountTable& data, const std::vector<QMatrix>& candidates,
                               int restarts, bool require_stringent, std::uint64_t seed,
                               const EmOptions& options, int threads) {
    SearchReport rep;
    rep.candidates.resize(candidates.size());
    parallel_for(candidates.size(), threads, [&](std::size_t i) {
        auto& c = rep.candidates[i];
        c.q = candidates[i];
        try {
            // seed from the matrix itself so the sweep does not depend on list order
            c.fit = multistart_fit(kind, c.q, data, restarts, seed ^ fnv1a(c.q.compact()), options, 1);
            c.eligible = !require_stringent || c.fit->stringent_ok;
        } catch (const std::exception& e) {
            c.error = e.what();
        }
    });
    auto better = [&](int a, int b) {
        const auto& A = rep.candidates[a];
        const auto& B = rep.candidates[b];
        if (A.fit->loglik != B.fit->loglik) return A.fit->loglik > B.fit->loglik;
        if (A.q.ones() != B.q.ones()) return A.q.ones() < B.q.ones();
        return A.q.compact() < B.q.compact();
    };
    int second = -1;
    for (int i = 0; i < static_cast<int>(rep.candidates.size()); ++i) {
        if (!rep.candidates[i].fit || !rep.candidates[i].eligible) continue;
        if (rep.argmax < 0 || better(i, rep.argmax)) {
            second = rep.argmax;
            rep.argmax = i;
        } else if (second < 0 || better(i, second)) {
            second = i;
        }
    }
    if (rep.argmax >= 0 && second >= 0)
        rep.gap = rep.candidates[rep.argmax].fit->loglik - rep.candidates[second].fit->loglik;
    return rep;
}

Model relabel_attributes(const Model& m, const std::vector<int>& perm) {
    const int K = m.q.attributes();
    const Pattern C = Pattern{1} << K;
    auto old_of = [&](Pattern a) {
        Pattern o = 0;
        for (int c = 0; c < K; ++c)
            if (a >> c & 1u) o |= Pattern{1} << perm[c];
        return o;
    };
    Model out = m;
    out.q = m.q.permute_columns(perm);
    for (Pattern a = 0; a < C; ++a) out.p[a] = m.p[old_of(a)];
    if (const auto* t = std::get_if<GdinaParams>(&m.params)) {
        GdinaParams nt = *t;
        for (int j = 0; j < t->items(); ++j)
            for (Pattern a = 0; a < C; ++a) nt(j, a) = (*t)(j, old_of(a));
        out.params = nt;
    }
    return out;
}

Alignment align_to_truth(const Model& estimate, const Model& truth) {
    const int K = truth.q.attributes();
    if (K > 10) throw Error(ErrorCode::TooManyAttributes, "alignment needs K <= 10");
    if (estimate.q.items() != truth.q.items() || estimate.q.attributes() != K)
        throw Error(ErrorCode::ShapeMismatch, "estimate and truth differ in shape");
    auto sq_error = [&](const Model& a) {
        double e = 0.0;
        for (std::size_t i = 0; i < a.p.size(); ++i) e += (a.p[i] - truth.p[i]) * (a.p[i] - truth.p[i]);
        const auto* da = std::get_if<DinaParams>(&a.params);
        const auto* dt = std::get_if<DinaParams>(&truth.params);
        if (da && dt) {
            for (int j = 0; j < da->items(); ++j)
                e += (da->s[j] - dt->s[j]) * (da->s[j] - dt->s[j]) + (da->g[j] - dt->g[j]) * (da->g[j] - dt->g[j]);
        } else {
            auto ta = theta_table(a), tt = theta_table(truth);
            for (std::size_t i = 0; i < ta.data().size(); ++i)
                e += (ta.data()[i] - tt.data()[i]) * (ta.data()[i] - tt.data()[i]);
        }
        return e;
    };
    std::vector<std::vector<int>> perms, admissible;
    std::vector<int> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        perms.push_back(perm);
        if (estimate.q.permute_columns(perm) == truth.q) admissible.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    // label swaps that keep Q fixed are the only symmetries of the likelihood;
    // fall back to every permutation when the fitted Q differs from the truth
    const auto& pool = admissible.empty() ? perms : admissible;
    Alignment best;
    bool first = true;
    for (const auto& pm : pool) {
        Model m = relabel_attributes(estimate, pm);
        const double e = sq_error(m);
        if (first || e < best.squared_error) {
            best = {pm, std::move(m), e};
            first = false;
        }
    }
    return best;
}

TruthSampler default_truth_sampler(const QMatrix& q) {
    return [q](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> unif(0.1, 0.3);
        DinaParams d;
        for (int j = 0; j < q.items(); ++j) {
            d.s.push_back(unif(rng));
            d.g.push_back(unif(rng));
        }
        Model m;
        m.kind = ModelKind::Dina;
        m.q = q;
        m.params = d;
        m.p = dirichlet(std::size_t{1} << q.attributes(), 3.0, rng);
        return m;
    };
}

MseReport mse_experiment(const QMatrix& q, const TruthSampler& sampler, int truths,
                         const std::vector<std::size_t>& n_grid, int replications, std::uint64_t seed,
                         int restarts, const EmOptions& options, int threads) {
    MseReport rep;
    if (replications <= 0 || truths <= 0 || n_grid.empty()) return rep;
    auto rng = make_rng({seed, 0xfeedULL});
    for (int t = 0; t < truths; ++t) rep.truths.push_back(sampler(rng));

    struct Cell {
        double s = 0, g = 0, p = 0, theta = 0;
    };
    const std::size_t tasks = static_cast<std::size_t>(truths) * n_grid.size() * replications;
    std::vector<Cell> cells(tasks);
    parallel_for(tasks, threads, [&](std::size_t idx) {
        const int rep_i = static_cast<int>(idx % replications);
        const std::size_t n_i = (idx / replications) % n_grid.size();
        const int t = static_cast<int>(idx / replications / n_grid.size());
        const Model& truth = rep.truths[t];
        auto data_rng = make_rng({seed, static_cast<std::uint64_t>(t), n_grid[n_i], static_cast<std::uint64_t>(rep_i)});
        auto data = simulate(truth, n_grid[n_i], data_rng).tabulate();
        auto fit = multistart_fit(truth.kind, q, data, restarts, data_rng(), options, 1);
        auto al = align_to_truth(fit.model, truth);
        Cell c;
        const double C = static_cast<double>(truth.p.size());
        for (std::size_t a = 0; a < truth.p.size(); ++a) c.p += std::pow(al.aligned.p[a] - truth.p[a], 2) / C;
        if (const auto* d = std::get_if<DinaParams>(&al.aligned.params)) {
            const auto& dt = std::get<DinaParams>(truth.params);
            for (int j = 0; j < d->items(); ++j) {
                c.s += std::pow(d->s[j] - dt.s[j], 2) / d->items();
                c.g += std::pow(d->g[j] - dt.g[j], 2) / d->items();
            }
        }
        auto ta = theta_table(al.aligned), tt = theta_table(truth);
        for (std::size_t i = 0; i < ta.data().size(); ++i)
            c.theta += std::pow(ta.data()[i] - tt.data()[i], 2) / static_cast<double>(ta.data().size());
        cells[idx] = c;
    });
    for (int t = 0; t < truths; ++t)
        for (std::size_t n_i = 0; n_i < n_grid.size(); ++n_i) {
            MseRow row;
            row.truth = t;
            row.n = n_grid[n_i];
            row.replications = replications;
            for (int r = 0; r < replications; ++r) {
                const auto& c = cells[(static_cast<std::size_t>(t) * n_grid.size() + n_i) * replications + r];
                row.mse_s += c.s / replications;
                row.mse_g += c.g / replications;
                row.mse_p += c.p / replications;
                row.mse_theta += c.theta / replications;
            }
            const auto& p = rep.truths[t].p;
            row.constraint_distance = p.size() == 4 ? std::abs(p[2] * p[1] - p[0] * p[3])
                                                    : std::numeric_limits<double>::quiet_NaN();
            rep.rows.push_back(row);
        }
    return rep;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::DimensionMismatch, "need paired samples");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t k = i;
            while (k + 1 < idx.size() && v[idx[k + 1]] == v[idx[i]]) ++k;
            for (std::size_t m = i; m <= k; ++m) r[idx[m]] = (i + k) / 2.0 + 1.0;
            i = k + 1;
        }
        return r;
    };
    auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace qident
