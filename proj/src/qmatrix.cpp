#include "qident/qmatrix.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>

#include "qident/error.hpp"

namespace qident {

namespace {

constexpr int kMaxAttributes = 30;

// Kuhn's augmenting path step for the left node `u`.
bool augment(int u, const std::vector<std::vector<int>>& adj, std::vector<int>& owner,
             std::vector<char>& seen) {
    for (int j : adj[u]) {
        if (seen[j]) continue;
        seen[j] = 1;
        if (owner[j] < 0 || augment(owner[j], adj, owner, seen)) {
            owner[j] = u;
            return true;
        }
    }
    return false;
}

// Matching of `copies` copies of every attribute into distinct rows of `allowed`.
// Returns per left node (attribute k, copy c -> index c*K+k) the row, or empty.
std::vector<int> multi_matching(const QMatrix& q, const std::vector<char>& allowed, int copies) {
    const int K = q.attributes();
    const int J = q.items();
    std::vector<std::vector<int>> adj(copies * K);
    for (int c = 0; c < copies; ++c)
        for (int k = 0; k < K; ++k)
            for (int j = 0; j < J; ++j)
                if (allowed[j] && q.at(j, k)) adj[c * K + k].push_back(j);
    std::vector<int> owner(J, -1);
    for (int u = 0; u < copies * K; ++u) {
        std::vector<char> seen(J, 0);
        if (!augment(u, adj, owner, seen)) return {};
    }
    std::vector<int> rows(copies * K, -1);
    for (int j = 0; j < J; ++j)
        if (owner[j] >= 0) rows[owner[j]] = j;
    return rows;
}

std::vector<int> row_encoding(const QMatrix& q, const std::vector<int>& perm) {
    const int K = q.attributes();
    std::vector<int> enc(q.items());
    for (int j = 0; j < q.items(); ++j) {
        int v = 0;
        for (int c = 0; c < K; ++c) v = (v << 1) | q.at(j, perm[c]);
        enc[j] = v;
    }
    return enc;
}

bool satisfies_abc(const QMatrix& q) {
    auto a = check_condition_A(q);
    return a.ok && check_condition_B(q) && check_condition_C(q, 3);
}

std::string ratio_constraint(int k, int K) {
    if (K == 2) return "p01·p10 ≠ p00·p11";
    std::string ks = std::to_string(k + 1);
    return "attribute " + ks + ": p[a]·p[a'+e" + ks + "] ≠ p[a']·p[a+e" + ks +
           "] for some a, a' with a" + ks + " = a'" + ks + " = 0";
}

}  // namespace

QMatrix::QMatrix(int items, int attributes) : J_(items), K_(attributes), rows_(items, 0) {
    if (items < 1 || attributes < 1) throw Error(ErrorCode::WrongShape, "J and K must be positive");
    if (attributes > kMaxAttributes) throw Error(ErrorCode::TooLarge, "K exceeds 30");
}

QMatrix::QMatrix(const std::vector<std::vector<int>>& entries) {
    if (entries.empty() || entries[0].empty()) throw Error(ErrorCode::WrongShape, "empty Q-matrix");
    *this = QMatrix(static_cast<int>(entries.size()), static_cast<int>(entries[0].size()));
    for (int j = 0; j < J_; ++j) {
        if (static_cast<int>(entries[j].size()) != K_)
            throw Error(ErrorCode::WrongShape, "ragged Q-matrix at row " + std::to_string(j + 1));
        for (int k = 0; k < K_; ++k) {
            int v = entries[j][k];
            if (v != 0 && v != 1) throw Error(ErrorCode::WrongShape, "Q entries must be 0 or 1");
            set(j, k, v);
        }
    }
}

QMatrix QMatrix::from_masks(int attributes, std::vector<Pattern> rows) {
    QMatrix q(static_cast<int>(rows.size()), attributes);
    const Pattern full = attributes >= 32 ? ~Pattern{0} : ((Pattern{1} << attributes) - 1);
    for (auto r : rows)
        if (r & ~full) throw Error(ErrorCode::WrongShape, "row mask exceeds K bits");
    q.rows_ = std::move(rows);
    return q;
}

void QMatrix::set(int j, int k, int v) {
    if (v) rows_[j] |= (Pattern{1} << k);
    else rows_[j] &= ~(Pattern{1} << k);
}

int QMatrix::column_sum(int k) const {
    int s = 0;
    for (auto r : rows_) s += (r >> k) & 1u;
    return s;
}

int QMatrix::ones() const {
    int s = 0;
    for (auto r : rows_) s += std::popcount(r);
    return s;
}

bool QMatrix::has_zero_rows() const {
    return std::any_of(rows_.begin(), rows_.end(), [](Pattern r) { return r == 0; });
}

bool QMatrix::has_zero_columns() const {
    for (int k = 0; k < K_; ++k)
        if (column_sum(k) == 0) return true;
    return false;
}

QMatrix QMatrix::permute_columns(const std::vector<int>& perm) const {
    QMatrix out(J_, K_);
    for (int j = 0; j < J_; ++j)
        for (int c = 0; c < K_; ++c) out.set(j, c, at(j, perm[c]));
    return out;
}

QMatrix QMatrix::permute_rows(const std::vector<int>& perm) const {
    return select_rows(perm);
}

QMatrix QMatrix::select_rows(const std::vector<int>& idx) const {
    if (idx.empty()) throw Error(ErrorCode::WrongShape, "row selection is empty");
    QMatrix out(static_cast<int>(idx.size()), K_);
    for (std::size_t i = 0; i < idx.size(); ++i) out.rows_[i] = rows_.at(idx[i]);
    return out;
}

QMatrix QMatrix::drop_column(int k) const {
    if (K_ < 2) throw Error(ErrorCode::WrongShape, "cannot drop the only column");
    QMatrix out(J_, K_ - 1);
    for (int j = 0; j < J_; ++j) {
        int c = 0;
        for (int kk = 0; kk < K_; ++kk)
            if (kk != k) out.set(j, c++, at(j, kk));
    }
    return out;
}

std::vector<std::vector<int>> QMatrix::to_vectors() const {
    std::vector<std::vector<int>> out(J_, std::vector<int>(K_));
    for (int j = 0; j < J_; ++j)
        for (int k = 0; k < K_; ++k) out[j][k] = at(j, k);
    return out;
}

std::string QMatrix::to_string(const std::string& row_sep) const {
    std::string s;
    for (int j = 0; j < J_; ++j) {
        if (j) s += row_sep;
        for (int k = 0; k < K_; ++k) {
            if (k) s += ' ';
            s += at(j, k) ? '1' : '0';
        }
    }
    return s;
}

std::string QMatrix::compact() const {
    std::string s;
    for (int j = 0; j < J_; ++j) {
        if (j) s += ';';
        for (int k = 0; k < K_; ++k) s += at(j, k) ? '1' : '0';
    }
    return s;
}

std::string pattern_string(Pattern alpha, int K) {
    std::string s;
    for (int k = 0; k < K; ++k) s += ((alpha >> k) & 1u) ? '1' : '0';
    return s;
}

std::vector<Response> ideal_response_columns(const QMatrix& q) {
    if (q.items() > 64) throw Error(ErrorCode::TooLarge, "ideal response columns need J <= 64");
    if (q.attributes() > 20) throw Error(ErrorCode::TooLarge, "2^K columns need K <= 20");
    const Pattern n = Pattern{1} << q.attributes();
    std::vector<Response> cols(n, 0);
    for (Pattern a = 0; a < n; ++a)
        for (int j = 0; j < q.items(); ++j)
            if (covers(a, q.row(j))) cols[a] |= Response{1} << j;
    return cols;
}

StripResult strip_zero_rows(const QMatrix& q) {
    std::vector<int> keep, removed;
    for (int j = 0; j < q.items(); ++j) (q.row(j) ? keep : removed).push_back(j);
    if (keep.empty()) throw Error(ErrorCode::AllRowsZero, "every row of Q is zero");
    if (removed.empty()) return {q, {}};
    return {q.select_rows(keep), removed};
}

CompletenessWitness check_condition_A(const QMatrix& q) {
    CompletenessWitness w;
    w.rows.assign(q.attributes(), -1);
    for (int j = 0; j < q.items(); ++j) {
        Pattern r = q.row(j);
        if (std::popcount(r) == 1) {
            int k = std::countr_zero(r);
            if (w.rows[k] < 0) w.rows[k] = j;
        }
    }
    w.ok = std::all_of(w.rows.begin(), w.rows.end(), [](int j) { return j >= 0; });
    if (!w.ok) w.rows.clear();
    return w;
}

bool check_condition_B(const QMatrix& q) {
    auto a = check_condition_A(q);
    if (!a.ok) throw Error(ErrorCode::NotComplete, "Condition A fails, B is undefined");
    const int K = q.attributes();
    if (K == 1) return true;
    // All copies of e_k are equal rows, so every choice of identity rows leaves
    // the same residual up to row order and one selection decides B.
    std::vector<char> drop(q.items(), 0);
    for (int j : a.rows) drop[j] = 1;
    std::vector<std::vector<char>> cols(K);
    for (int j = 0; j < q.items(); ++j)
        if (!drop[j])
            for (int k = 0; k < K; ++k) cols[k].push_back(static_cast<char>(q.at(j, k)));
    std::sort(cols.begin(), cols.end());
    return std::adjacent_find(cols.begin(), cols.end()) == cols.end();
}

bool check_condition_C(const QMatrix& q, int min_count) {
    for (int k = 0; k < q.attributes(); ++k)
        if (q.column_sum(k) < min_count) return false;
    return true;
}

Matching check_generic_completeness(const QMatrix& q) {
    std::vector<int> all(q.items());
    std::iota(all.begin(), all.end(), 0);
    return check_generic_completeness(q, all);
}

Matching check_generic_completeness(const QMatrix& q, const std::vector<int>& allowed_rows) {
    std::vector<char> allowed(q.items(), 0);
    for (int j : allowed_rows) allowed.at(j) = 1;
    Matching m;
    m.rows = multi_matching(q, allowed, 1);
    m.ok = !m.rows.empty();
    return m;
}

DePartition check_conditions_DE(const QMatrix& q) {
    const int J = q.items();
    const int K = q.attributes();
    if (J > 64) throw Error(ErrorCode::TooLarge, "Condition D/E search needs J <= 64");
    DePartition out;

    // Two disjoint generically complete blocks exist iff every attribute can be
    // matched to two distinct rows; splitting the copies gives the blocks, and
    // row order inside each block realizes any common column order.
    auto split = [&](const std::vector<int>& two) {
        out.block1.assign(two.begin(), two.begin() + K);
        out.block2.assign(two.begin() + K, two.end());
        std::vector<char> used(J, 0);
        for (int j : two) used[j] = 1;
        out.rest.clear();
        for (int j = 0; j < J; ++j)
            if (!used[j]) out.rest.push_back(j);
    };

    std::vector<char> allowed(J, 1);
    auto two = multi_matching(q, allowed, 2);
    if (two.empty()) return out;
    out.D = true;
    split(two);

    // E: look for a set of rows covering every attribute whose complement still
    // carries the double matching. Branch on the lowest uncovered attribute.
    const Pattern all_attr = (Pattern{1} << K) - 1;
    std::set<std::uint64_t> visited;
    std::vector<int> found;
    auto dfs = [&](auto&& self, Pattern covered, std::uint64_t chosen) -> bool {
        if (covered == all_attr) {
            if (!visited.insert(chosen).second) return false;
            std::vector<char> rem(J, 0);
            for (int j = 0; j < J; ++j) rem[j] = !((chosen >> j) & 1u);
            auto m = multi_matching(q, rem, 2);
            if (m.empty()) return false;
            found = std::move(m);
            return true;
        }
        if (J - std::popcount(chosen) < 2 * K + 1) return false;
        int k = std::countr_zero(static_cast<Pattern>(~covered & all_attr));
        for (int j = 0; j < J; ++j) {
            if (((chosen >> j) & 1u) || !q.at(j, k)) continue;
            std::uint64_t next = chosen | (std::uint64_t{1} << j);
            std::vector<char> rem(J, 0);
            for (int i = 0; i < J; ++i) rem[i] = !((next >> i) & 1u);
            if (multi_matching(q, rem, 2).empty()) continue;  // removing more rows cannot help
            if (self(self, covered | q.row(j), next)) return true;
        }
        return false;
    };
    if (dfs(dfs, 0, 0)) {
        out.E = true;
        split(found);
    }
    return out;
}

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::StrictlyIdentifiable: return "StrictlyIdentifiable";
        case Scenario::GenericScenarioB1: return "GenericScenarioB1";
        case Scenario::GenericScenarioB2: return "GenericScenarioB2";
        case Scenario::LocalGenericC: return "LocalGenericC";
        case Scenario::GenericConditionsDE: return "GenericConditionsDE";
        case Scenario::NotLocallyGeneric_A: return "NotLocallyGeneric_A";
        case Scenario::NotGeneric_OneItemAttribute: return "NotGeneric_OneItemAttribute";
        case Scenario::NotGeneric_FailsB: return "NotGeneric_FailsB";
        case Scenario::NotGeneric_FailsGenericCompleteness: return "NotGeneric_FailsGenericCompleteness";
        case Scenario::NotGeneric_FailsC_GDINA: return "NotGeneric_FailsC_GDINA";
        case Scenario::NotGeneric_FailsDE_K2: return "NotGeneric_FailsDE_K2";
        case Scenario::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

std::string scenario_label(Scenario s) {
    switch (s) {
        case Scenario::StrictlyIdentifiable: return "strictly identifiable (A,B,C)";
        case Scenario::GenericScenarioB1: return "generic (scenario b.1)";
        case Scenario::GenericScenarioB2: return "generic (scenario b.2)";
        case Scenario::LocalGenericC: return "locally generic (scenario c)";
        case Scenario::GenericConditionsDE: return "generic (D,E)";
        case Scenario::NotLocallyGeneric_A: return "not locally generic (scenario a / A fails)";
        case Scenario::NotGeneric_OneItemAttribute: return "not generic (attribute required by one item)";
        case Scenario::NotGeneric_FailsB: return "not generic (B fails, K=2)";
        case Scenario::NotGeneric_FailsGenericCompleteness: return "not generic (not generically complete)";
        case Scenario::NotGeneric_FailsC_GDINA: return "not generic (C fails)";
        case Scenario::NotGeneric_FailsDE_K2: return "not generic (D/E fail, K=2)";
        case Scenario::Undetermined: return "undetermined";
    }
    return "undetermined";
}

bool scenario_is_generic(Scenario s) {
    return s == Scenario::StrictlyIdentifiable || s == Scenario::GenericScenarioB1 ||
           s == Scenario::GenericScenarioB2 || s == Scenario::GenericConditionsDE;
}

namespace {

ConditionFlags all_flags(const QMatrix& q, DePartition* de_out, std::vector<std::string>& notes) {
    ConditionFlags f;
    f.A = check_condition_A(q).ok;
    f.B = f.A && check_condition_B(q);
    f.C = check_condition_C(q, 3);
    f.generic_complete = check_generic_completeness(q).ok;
    if (q.items() <= 64) {
        auto de = check_conditions_DE(q);
        f.D = de.D;
        f.E = de.E;
        if (de_out) *de_out = de;
    } else {
        notes.push_back("D/E not evaluated for J > 64");
    }
    return f;
}

}  // namespace

IdentifiabilityVerdict classify_dina(const QMatrix& q) {
    if (q.has_zero_rows()) throw Error(ErrorCode::HasZeroRows, "strip zero rows before classifying");
    IdentifiabilityVerdict v;
    v.model = ModelFamily::Dina;
    v.conditions = all_flags(q, nullptr, v.notes);
    const int K = q.attributes();
    const auto& f = v.conditions;

    if (f.A && f.B && f.C) {
        v.scenario = Scenario::StrictlyIdentifiable;
        if (K == 1) v.notes.push_back("K = 1: Condition B is vacuous, classified by A and C");
        return v;
    }

    std::vector<int> sums(K);
    for (int k = 0; k < K; ++k) sums[k] = q.column_sum(k);

    for (int k = 0; k < K; ++k)
        if (sums[k] == 1) {
            v.scenario = Scenario::NotGeneric_OneItemAttribute;
            v.pivot_attribute = k;
            return v;
        }
    for (int k = 0; k < K; ++k)
        if (sums[k] == 0) {
            v.scenario = Scenario::NotLocallyGeneric_A;
            v.pivot_attribute = k;
            v.notes.push_back("attribute " + std::to_string(k + 1) + " is required by no item");
            return v;
        }

    // Two-item attributes in the form (1 0'; 1 v'; 0 Q*).
    struct Pivot {
        int k;
        Pattern v;  // second row without bit k
        Pattern rest_full;
    };
    std::vector<Pivot> pivots;
    for (int k = 0; k < K; ++k) {
        if (sums[k] != 2) continue;
        int r1 = -1, r2 = -1;
        for (int j = 0; j < q.items(); ++j)
            if (q.at(j, k)) (r1 < 0 ? r1 : r2) = j;
        const Pattern ek = Pattern{1} << k;
        int other = -1;
        if (q.row(r1) == ek) other = r2;
        else if (q.row(r2) == ek) other = r1;
        if (other < 0) continue;
        const Pattern full = ((Pattern{1} << K) - 1) & ~ek;
        pivots.push_back({k, q.row(other) & ~ek, full});
    }
    int twice = 0;
    for (int k = 0; k < K; ++k) twice += sums[k] == 2;

    for (const auto& p : pivots)
        if (p.v == p.rest_full) {
            v.scenario = Scenario::NotLocallyGeneric_A;
            v.pivot_attribute = p.k;
            if (K == 1) v.notes.push_back("K = 1 with two items: the empty v counts as all ones");
            return v;
        }

    if (!f.A) {
        v.scenario = Scenario::NotLocallyGeneric_A;
        return v;
    }

    for (const auto& p : pivots) {
        std::vector<int> keep;
        for (int j = 0; j < q.items(); ++j)
            if (!q.at(j, p.k)) keep.push_back(j);
        QMatrix qs = q.select_rows(keep).drop_column(p.k);
        const bool abc = satisfies_abc(qs);
        if (p.v == 0) {
            bool two_id = true;
            for (int k = 0; k < qs.attributes(); ++k) {
                int c = 0;
                for (int j = 0; j < qs.items(); ++j) c += qs.row(j) == (Pattern{1} << k);
                two_id = two_id && c >= 2;
            }
            if (!two_id && !abc) continue;
            v.pivot_attribute = p.k;
            if (two_id) {
                v.scenario = Scenario::GenericScenarioB2;
                if (abc) v.also_applicable.push_back(Scenario::GenericScenarioB1);
                std::set<std::string> cons;
                for (int k = 0; k < K; ++k) cons.insert(ratio_constraint(k, K));
                v.constraints.assign(cons.begin(), cons.end());
            } else {
                v.scenario = Scenario::GenericScenarioB1;
                v.constraints.push_back(ratio_constraint(p.k, K));
            }
            if (twice > 1)
                v.notes.push_back("several attributes are required by exactly two items; pivot attribute " +
                                  std::to_string(p.k + 1));
            return v;
        }
        if (abc) {
            v.scenario = Scenario::LocalGenericC;
            v.pivot_attribute = p.k;
            v.notes.push_back("local generic identifiability only");
            return v;
        }
    }

    if (K == 2 && !f.B) {
        v.scenario = Scenario::NotGeneric_FailsB;
        return v;
    }
    v.scenario = Scenario::Undetermined;
    if (twice > 1) v.notes.push_back("several attributes are required by exactly two items");
    return v;
}

IdentifiabilityVerdict classify_gdina(const QMatrix& q) {
    if (q.has_zero_rows()) throw Error(ErrorCode::HasZeroRows, "strip zero rows before classifying");
    IdentifiabilityVerdict v;
    v.model = ModelFamily::Gdina;
    DePartition de;
    v.conditions = all_flags(q, &de, v.notes);
    const auto& f = v.conditions;
    auto rows_text = [](const std::vector<int>& rows) {
        std::string s;
        for (std::size_t i = 0; i < rows.size(); ++i) s += (i ? "," : "") + std::to_string(rows[i] + 1);
        return s;
    };
    if (f.D && f.E) {
        v.scenario = Scenario::GenericConditionsDE;
        v.constraints.push_back("det T(Q1) ≠ 0 with Q1 = rows {" + rows_text(de.block1) + "}");
        v.constraints.push_back("det T(Q2) ≠ 0 with Q2 = rows {" + rows_text(de.block2) + "}");
        v.constraints.push_back("T(Q*)·Diag(p) has distinct columns with Q* = rows {" + rows_text(de.rest) + "}");
        return v;
    }
    if (!f.C) {
        v.scenario = Scenario::NotGeneric_FailsC_GDINA;
        return v;
    }
    if (!f.generic_complete) {
        v.scenario = Scenario::NotGeneric_FailsGenericCompleteness;
        return v;
    }
    if (q.attributes() == 2) {
        v.scenario = Scenario::NotGeneric_FailsDE_K2;
        return v;
    }
    v.scenario = Scenario::Undetermined;
    return v;
}

QMatrix canonical_form(const QMatrix& q) {
    const int K = q.attributes();
    if (K > 10) throw Error(ErrorCode::TooLarge, "canonical form needs K <= 10");
    std::vector<int> perm(K), best;
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best_enc;
    do {
        auto enc = row_encoding(q, perm);
        if (best.empty() || enc < best_enc) {
            best_enc = std::move(enc);
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return q.permute_columns(best);
}

std::vector<QMatrix> enumerate_canonical(int J, int K, bool include_zero_columns) {
    if (J < 1 || K < 1) throw Error(ErrorCode::WrongShape, "J and K must be positive");
    if (J * K > 24) throw Error(ErrorCode::TooLarge, "enumeration needs J*K <= 24");
    const int top = (1 << K) - 1;
    std::vector<int> enc(J, 1);  // encoded rows, attribute 1 as the high bit
    std::vector<std::vector<int>> perms;
    {
        std::vector<int> p(K);
        std::iota(p.begin(), p.end(), 0);
        do perms.push_back(p);
        while (std::next_permutation(p.begin(), p.end()));
    }
    std::vector<QMatrix> out;
    while (true) {
        QMatrix q(J, K);
        for (int j = 0; j < J; ++j)
            for (int c = 0; c < K; ++c) q.set(j, c, (enc[j] >> (K - 1 - c)) & 1);
        bool minimal = true;
        for (std::size_t i = 1; i < perms.size() && minimal; ++i)
            if (row_encoding(q, perms[i]) < enc) minimal = false;
        if (minimal && (include_zero_columns || !q.has_zero_columns())) out.push_back(q);
        int j = J - 1;
        while (j >= 0 && enc[j] == top) enc[j--] = 1;
        if (j < 0) break;
        ++enc[j];
    }
    return out;
}

std::optional<std::vector<int>> find_column_permutation(const QMatrix& a, const QMatrix& b) {
    if (a.items() != b.items() || a.attributes() != b.attributes())
        throw Error(ErrorCode::ShapeMismatch, "Q-matrices differ in shape");
    const int K = a.attributes();
    if (K > 10) throw Error(ErrorCode::TooLarge, "permutation search needs K <= 10");
    std::vector<int> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        if (a.permute_columns(perm) == b) return perm;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::nullopt;
}

bool q_equivalent(const QMatrix& a, const QMatrix& b) {
    return find_column_permutation(a, b).has_value();
}

}  // namespace qident
