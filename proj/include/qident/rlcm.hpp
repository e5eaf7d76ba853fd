#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qident/qmatrix.hpp"

namespace qident {

enum class ModelKind { Dina, Dino, Gdina };

const char* model_name(ModelKind m);
ModelKind parse_model(const std::string& name);

struct DinaParams {
    std::vector<double> s;  // slipping
    std::vector<double> g;  // guessing
    int items() const { return static_cast<int>(s.size()); }
    double c(int j) const { return 1.0 - s[j]; }
};

// Saturated J x 2^K table of positive response probabilities.
class GdinaParams {
public:
    GdinaParams() = default;
    GdinaParams(int items, int attributes, double fill = 0.5);

    int items() const { return J_; }
    int attributes() const { return K_; }
    std::size_t classes() const { return std::size_t{1} << K_; }
    double operator()(int j, Pattern a) const { return theta_[j * classes() + a]; }
    double& operator()(int j, Pattern a) { return theta_[j * classes() + a]; }
    const double* row(int j) const { return theta_.data() + j * classes(); }
    const std::vector<double>& data() const { return theta_; }

private:
    int J_ = 0;
    int K_ = 0;
    std::vector<double> theta_;
};

using ItemParams = std::variant<DinaParams, GdinaParams>;

struct Model {
    ModelKind kind = ModelKind::Dina;
    QMatrix q;
    ItemParams params;
    std::vector<double> p;  // length 2^K, indexed by attribute pattern
};

double theta_dina(const DinaParams& params, const QMatrix& q, int j, Pattern alpha);
double theta_dino(const DinaParams& params, const QMatrix& q, int j, Pattern alpha);

// DINA/DINO written out as a saturated table; exact copies of 1-s and g.
GdinaParams dina_to_gdina(const DinaParams& params, const QMatrix& q, bool dino = false);
GdinaParams theta_table(const Model& m);

// beta[j][S] with S an attribute subset mask
using BetaTable = std::vector<std::vector<double>>;
GdinaParams beta_to_theta(const BetaTable& beta, const QMatrix& q);
BetaTable theta_to_beta(const GdinaParams& theta, const QMatrix& q);

void validate_dina(const DinaParams& params, int items);
void validate_proportions(const std::vector<double>& p, int attributes, bool strict = true);
void validate_model(const Model& m, bool strict_p = true);
bool gdina_equality_ok(const GdinaParams& theta, const QMatrix& q, double tol = 0.0);
bool monotone_ok(const GdinaParams& theta, const QMatrix& q);
bool stringent_ok(const GdinaParams& theta, const QMatrix& q);
bool dina_monotone_ok(const DinaParams& params);

double pmf(const Model& m, Response r);
std::vector<double> full_distribution(const Model& m);
std::vector<double> full_distribution(const GdinaParams& theta, const std::vector<double>& p);

struct CountTable {
    int items = 0;
    std::vector<Response> patterns;  // sorted, unique
    std::vector<double> counts;
    double total() const;
};

struct Dataset {
    int items = 0;
    std::vector<Response> responses;
    std::size_t size() const { return responses.size(); }
    CountTable tabulate() const;
};

Dataset simulate(const Model& m, std::size_t n, std::mt19937_64& rng);
Dataset simulate(const Model& m, std::size_t n, std::uint64_t seed);

}  // namespace qident
