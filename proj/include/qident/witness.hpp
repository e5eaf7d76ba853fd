#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qident/rlcm.hpp"

namespace qident {

enum class Construction {
    DinaOneItemAttr,
    DinaScenarioA,
    DinaQ24TwoSolutions,
    GdinaOneItemAttr,
    GdinaTwoItemAttr,
    IncompleteGammaMerge,
};

const char* construction_name(Construction c);

struct WitnessPair {
    Model truth;
    Model alternative;
    Construction construction = Construction::DinaOneItemAttr;
    double certified_max_diff = -1.0;
    bool exact = true;           // false when certified by sampling
    std::vector<int> pivot_attributes;
    std::vector<int> pivot_items;
};

constexpr double kCertifyTolerance = 1e-12;
constexpr double kDistinctFloor = 1e-6;

// max over all response patterns of |pmf_truth - pmf_alt|; J <= 20
double certify(WitnessPair& pair);
double certify(WitnessPair& pair, const std::vector<double>& truth_distribution);
// max over `samples` uniformly drawn patterns; marks the pair non-exact
double certify_sampled(WitnessPair& pair, std::size_t samples, std::uint64_t seed);
// sup-norm distance between the theta tables and proportions of two models
double parameter_gap(const Model& a, const Model& b);
bool is_certified(const WitnessPair& pair);

WitnessPair dina_one_item_attr(const QMatrix& q, const DinaParams& params, const std::vector<double>& p,
                               double cbar);
WitnessPair dina_scenario_a(const QMatrix& q, const DinaParams& params, const std::vector<double>& p,
                            double gbar);

QMatrix q4x2();
// Alternatives for Q4x2 when p01 p10 = p00 p11; one per guessing shift.
std::vector<WitnessPair> dina_q24_two_solutions(const DinaParams& params, const std::vector<double>& p,
                                                const std::vector<double>& guess_shifts = {-0.05, 0.05});
// Same construction without the constraint check or certification.
Model q24_factorized_alternative(const DinaParams& params, const std::vector<double>& p, double guess_shift);

// free_row is the alternative's full theta row for the single item measuring
// the attribute (that row of Q becomes all ones).
Model solve_gdina_one_item_attr(const QMatrix& q, const GdinaParams& theta, const std::vector<double>& p,
                                const std::vector<double>& free_row);
WitnessPair gdina_one_item_attr(const QMatrix& q, const GdinaParams& theta, const std::vector<double>& p,
                                const std::vector<double>& free_row);

// first/second hold the alternative's theta for the two items at (0, a'),
// indexed by the remaining K-1 attributes in their original order.
struct TwoItemFreeValues {
    std::vector<double> first;
    std::vector<double> second;
};
Model solve_gdina_two_item_attr(const QMatrix& q, const GdinaParams& theta, const std::vector<double>& p,
                                const TwoItemFreeValues& free);
WitnessPair gdina_two_item_attr(const QMatrix& q, const GdinaParams& theta, const std::vector<double>& p,
                                const TwoItemFreeValues& free);
// `count` witnesses with free values drawn uniformly within +-spread of the truth
std::vector<WitnessPair> gdina_two_item_attr(const QMatrix& q, const GdinaParams& theta,
                                             const std::vector<double>& p, int count, std::mt19937_64& rng,
                                             double spread = 0.1);

// p-bar for the Gamma merge; throws NotSubsumed
std::vector<double> merge_proportions(const QMatrix& q, const QMatrix& qbar, const std::vector<double>& p);
WitnessPair incomplete_gamma_merge(const QMatrix& q, const QMatrix& qbar, const DinaParams& params,
                                   const std::vector<double>& p);

}  // namespace qident
