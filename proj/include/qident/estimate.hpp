#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qident/rlcm.hpp"

namespace qident {

struct EmOptions {
    double tol = 1e-8;
    int max_iter = 2000;
    double clamp = 1e-4;  // item probabilities kept in [clamp, 1 - clamp]
};

struct FitResult {
    Model model;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    bool monotonicity_ok = false;
    bool stringent_ok = false;
    bool loglik_monotone = true;  // every EM step nondecreasing within 1e-9
    int restart = -1;
    std::vector<double> trace;
};

double log_likelihood(const Model& m, const CountTable& data);
Model random_init(ModelKind kind, const QMatrix& q, std::mt19937_64& rng);
std::vector<double> dirichlet(std::size_t n, double alpha, std::mt19937_64& rng);

FitResult em_fit(const QMatrix& q, const CountTable& data, const Model& init, const EmOptions& options = {});
FitResult multistart_fit(ModelKind kind, const QMatrix& q, const CountTable& data, int restarts,
                         std::uint64_t seed, const EmOptions& options = {}, int threads = 0);

struct CandidateResult {
    QMatrix q;
    std::optional<FitResult> fit;
    std::string error;
    bool eligible = false;
};

struct SearchReport {
    std::vector<CandidateResult> candidates;
    int argmax = -1;
    double gap = 0.0;  // best eligible loglik minus runner-up
};

SearchReport exhaustive_search(ModelKind kind, const CountTable& data, const std::vector<QMatrix>& candidates,
                               int restarts, bool require_stringent, std::uint64_t seed,
                               const EmOptions& options = {}, int threads = 0);

struct Alignment {
    std::vector<int> perm;  // aligned attribute c is estimate attribute perm[c]
    Model aligned;
    double squared_error = 0.0;
};

Model relabel_attributes(const Model& m, const std::vector<int>& perm);
Alignment align_to_truth(const Model& estimate, const Model& truth);

using TruthSampler = std::function<Model(std::mt19937_64&)>;
// s, g ~ U(0.1, 0.3), p ~ Dirichlet(3, ..., 3)
TruthSampler default_truth_sampler(const QMatrix& q);

struct MseRow {
    int truth = 0;
    std::size_t n = 0;
    int replications = 0;
    double mse_s = 0.0;
    double mse_g = 0.0;
    double mse_p = 0.0;
    double mse_theta = 0.0;
    double constraint_distance = 0.0;  // |p01 p10 - p00 p11| when K = 2
};

struct MseReport {
    std::vector<Model> truths;
    std::vector<MseRow> rows;
};

MseReport mse_experiment(const QMatrix& q, const TruthSampler& sampler, int truths,
                         const std::vector<std::size_t>& n_grid, int replications, std::uint64_t seed,
                         int restarts = 10, const EmOptions& options = {}, int threads = 0);

double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qident
