#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qident {

// Bit k of an attribute pattern is attribute k+1; bit j of a response
// pattern is item j+1.
using Pattern = std::uint32_t;
using Response = std::uint64_t;

inline bool covers(Pattern alpha, Pattern q) { return (alpha & q) == q; }

class QMatrix {
public:
    QMatrix() = default;
    QMatrix(int items, int attributes);
    explicit QMatrix(const std::vector<std::vector<int>>& entries);
    static QMatrix from_masks(int attributes, std::vector<Pattern> rows);

    int items() const { return J_; }
    int attributes() const { return K_; }
    int at(int j, int k) const { return (rows_[j] >> k) & 1u; }
    void set(int j, int k, int v);
    Pattern row(int j) const { return rows_[j]; }
    const std::vector<Pattern>& rows() const { return rows_; }

    int column_sum(int k) const;
    int ones() const;
    bool has_zero_rows() const;
    bool has_zero_columns() const;

    // new column c is old column perm[c]
    QMatrix permute_columns(const std::vector<int>& perm) const;
    // new row i is old row perm[i]
    QMatrix permute_rows(const std::vector<int>& perm) const;
    QMatrix select_rows(const std::vector<int>& idx) const;
    QMatrix drop_column(int k) const;
    std::vector<std::vector<int>> to_vectors() const;

    // "0 1\n1 1" style, rows joined by row_sep
    std::string to_string(const std::string& row_sep = "\n") const;
    // "01;11" style
    std::string compact() const;

    bool operator==(const QMatrix& o) const { return J_ == o.J_ && K_ == o.K_ && rows_ == o.rows_; }
    bool operator!=(const QMatrix& o) const { return !(*this == o); }

private:
    int J_ = 0;
    int K_ = 0;
    std::vector<Pattern> rows_;
};

// Γ(Q): column alpha as a bitmask over items, bit j set iff alpha covers q_j.
std::vector<Response> ideal_response_columns(const QMatrix& q);

struct StripResult {
    QMatrix q;
    std::vector<int> removed;
};
StripResult strip_zero_rows(const QMatrix& q);

// rows[k] is the (smallest) row index equal to e_k.
struct CompletenessWitness {
    bool ok = false;
    std::vector<int> rows;
};
CompletenessWitness check_condition_A(const QMatrix& q);
bool check_condition_B(const QMatrix& q);
bool check_condition_C(const QMatrix& q, int min_count = 3);

// rows[k] is the row matched to attribute k.
struct Matching {
    bool ok = false;
    std::vector<int> rows;
};
Matching check_generic_completeness(const QMatrix& q);
Matching check_generic_completeness(const QMatrix& q, const std::vector<int>& allowed_rows);

struct DePartition {
    bool D = false;
    bool E = false;
    std::vector<int> block1;  // block1[k] matched to attribute k
    std::vector<int> block2;
    std::vector<int> rest;
};
DePartition check_conditions_DE(const QMatrix& q);

enum class ModelFamily { Dina, Gdina };

enum class Scenario {
    StrictlyIdentifiable,
    GenericScenarioB1,
    GenericScenarioB2,
    LocalGenericC,
    GenericConditionsDE,
    NotLocallyGeneric_A,
    NotGeneric_OneItemAttribute,
    NotGeneric_FailsB,
    NotGeneric_FailsGenericCompleteness,
    NotGeneric_FailsC_GDINA,
    NotGeneric_FailsDE_K2,
    Undetermined,
};

const char* scenario_name(Scenario s);
// short human label, e.g. "generic (scenario b.2)"
std::string scenario_label(Scenario s);
bool scenario_is_generic(Scenario s);

struct ConditionFlags {
    bool A = false, B = false, C = false, D = false, E = false, generic_complete = false;
};

struct IdentifiabilityVerdict {
    ModelFamily model = ModelFamily::Dina;
    ConditionFlags conditions;
    Scenario scenario = Scenario::Undetermined;
    std::vector<Scenario> also_applicable;
    std::vector<std::string> constraints;
    std::vector<std::string> notes;
    // attribute (0-based) used for a two-item decomposition, -1 if none
    int pivot_attribute = -1;
};

IdentifiabilityVerdict classify_dina(const QMatrix& q);
IdentifiabilityVerdict classify_gdina(const QMatrix& q);

// Column-permutation orbit representatives of J x K matrices without zero
// rows. Matrices with an all-zero column are left out unless asked for.
std::vector<QMatrix> enumerate_canonical(int J, int K, bool include_zero_columns = false);
QMatrix canonical_form(const QMatrix& q);
bool q_equivalent(const QMatrix& a, const QMatrix& b);
// perm with a.permute_columns(perm) == b, if any
std::optional<std::vector<int>> find_column_permutation(const QMatrix& a, const QMatrix& b);

std::string pattern_string(Pattern alpha, int K);  // attribute 1 first

}  // namespace qident
