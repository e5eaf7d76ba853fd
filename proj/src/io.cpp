#include "qident/io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "qident/error.hpp"

namespace qident {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Token {
    std::string text;
    int column;  // 1-based
};

std::vector<Token> split_tokens(const std::string& line, std::size_t from, std::size_t to) {
    std::vector<Token> out;
    std::size_t i = from;
    while (i < to) {
        while (i < to && (std::isspace(static_cast<unsigned char>(line[i])) || line[i] == ',')) ++i;
        if (i >= to) break;
        std::size_t start = i;
        while (i < to && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != ',') ++i;
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

[[noreturn]] void parse_fail(int line, int col, const std::string& what) {
    throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
}

std::vector<double> vec_of(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array()) throw Error(ErrorCode::InvalidParameters, std::string("missing array '") + key + "'");
    return j[key].get<std::vector<double>>();
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << content;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

QMatrix parse_qmatrix(const std::string& text) {
    std::vector<std::vector<int>> rows;
    auto lines = lines_of(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::string& line = lines[ln];
        std::size_t end = line.find('#');
        if (end == std::string::npos) end = line.size();
        std::size_t seg = 0;
        while (seg <= end) {
            std::size_t stop = line.find(';', seg);
            if (stop == std::string::npos || stop > end) stop = end;
            auto toks = split_tokens(line, seg, stop);
            if (!toks.empty()) {
                std::vector<int> row;
                for (const auto& t : toks) {
                    if (t.text != "0" && t.text != "1")
                        parse_fail(static_cast<int>(ln) + 1, t.column, "invalid entry '" + t.text + "'");
                    row.push_back(t.text == "1");
                }
                if (!rows.empty() && row.size() != rows[0].size())
                    parse_fail(static_cast<int>(ln) + 1, toks.front().column,
                               "expected " + std::to_string(rows[0].size()) + " entries, found " +
                                   std::to_string(row.size()));
                rows.push_back(std::move(row));
            }
            seg = stop + 1;
        }
    }
    if (rows.empty()) throw Error(ErrorCode::Parse, "Q-matrix file has no rows");
    return QMatrix(rows);
}

QMatrix read_qmatrix(const std::string& path) { return parse_qmatrix(read_file(path)); }

Dataset parse_dataset(const std::string& text) {
    Dataset d;
    auto lines = lines_of(text);
    std::size_t first = 0;
    while (first < lines.size() && trim(lines[first]).empty()) ++first;
    if (first == lines.size()) return d;
    auto head = split_tokens(lines[first], 0, lines[first].size());
    bool header = false;
    for (const auto& t : head) header = header || (t.text != "0" && t.text != "1");
    if (header && !head.empty()) {
        std::string h = head[0].text;
        for (auto& c : h) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (h == "pattern") {
            for (std::size_t ln = first + 1; ln < lines.size(); ++ln) {
                auto toks = split_tokens(lines[ln], 0, lines[ln].size());
                if (toks.empty()) continue;
                if (toks.size() != 2) parse_fail(static_cast<int>(ln) + 1, 1, "expected pattern,count");
                const std::string& bits = toks[0].text;
                if (d.items == 0) d.items = static_cast<int>(bits.size());
                if (static_cast<int>(bits.size()) != d.items || d.items > 63)
                    parse_fail(static_cast<int>(ln) + 1, toks[0].column, "pattern length mismatch");
                Response r = 0;
                for (int j = 0; j < d.items; ++j) {
                    if (bits[j] != '0' && bits[j] != '1')
                        parse_fail(static_cast<int>(ln) + 1, toks[0].column + j, "invalid pattern bit");
                    if (bits[j] == '1') r |= Response{1} << j;
                }
                long long count = 0;
                try {
                    std::size_t used = 0;
                    count = std::stoll(toks[1].text, &used);
                    if (used != toks[1].text.size() || count < 0) throw std::invalid_argument("count");
                } catch (const std::exception&) {
                    parse_fail(static_cast<int>(ln) + 1, toks[1].column, "invalid count '" + toks[1].text + "'");
                }
                d.responses.insert(d.responses.end(), static_cast<std::size_t>(count), r);
            }
            return d;
        }
        d.items = static_cast<int>(head.size());
        ++first;
    }
    for (std::size_t ln = first; ln < lines.size(); ++ln) {
        auto toks = split_tokens(lines[ln], 0, lines[ln].size());
        if (toks.empty()) continue;
        if (d.items == 0) d.items = static_cast<int>(toks.size());
        if (static_cast<int>(toks.size()) != d.items)
            parse_fail(static_cast<int>(ln) + 1, toks.front().column, "expected " + std::to_string(d.items) + " responses");
        if (d.items > 63) parse_fail(static_cast<int>(ln) + 1, 1, "more than 63 items");
        Response r = 0;
        for (int j = 0; j < d.items; ++j) {
            if (toks[j].text != "0" && toks[j].text != "1")
                parse_fail(static_cast<int>(ln) + 1, toks[j].column, "invalid response '" + toks[j].text + "'");
            if (toks[j].text == "1") r |= Response{1} << j;
        }
        d.responses.push_back(r);
    }
    return d;
}

Dataset read_dataset(const std::string& path) { return parse_dataset(read_file(path)); }

std::string dataset_to_csv(const Dataset& d) {
    std::string out;
    for (int j = 0; j < d.items; ++j) out += (j ? ",item" : "item") + std::to_string(j + 1);
    out += '\n';
    for (auto r : d.responses) {
        for (int j = 0; j < d.items; ++j) {
            if (j) out += ',';
            out += (r >> j & 1u) ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

Model model_from_json(const Json& j, const QMatrix& q) {
    Model m;
    m.q = q;
    m.kind = parse_model(j.value("model", std::string("dina")));
    if (m.kind == ModelKind::Gdina) {
        if (!j.contains("theta")) throw Error(ErrorCode::InvalidParameters, "GDINA parameters need 'theta'");
        auto rows = j["theta"].get<std::vector<std::vector<double>>>();
        GdinaParams t(q.items(), q.attributes());
        if (static_cast<int>(rows.size()) != q.items()) throw Error(ErrorCode::DimensionMismatch, "theta needs J rows");
        for (int r = 0; r < q.items(); ++r) {
            if (rows[r].size() != t.classes()) throw Error(ErrorCode::DimensionMismatch, "theta rows need 2^K entries");
            for (Pattern a = 0; a < t.classes(); ++a) t(r, a) = rows[r][a];
        }
        m.params = t;
    } else {
        m.params = DinaParams{vec_of(j, "s"), vec_of(j, "g")};
    }
    m.p = vec_of(j, "p");
    validate_model(m, false);
    return m;
}

Json q_to_json(const QMatrix& q) { return q.to_vectors(); }

Json model_to_json(const Model& m) {
    Json j;
    j["model"] = model_name(m.kind);
    j["q"] = q_to_json(m.q);
    j["p"] = m.p;
    if (const auto* d = std::get_if<DinaParams>(&m.params)) {
        j["s"] = d->s;
        j["g"] = d->g;
    } else {
        const auto& t = std::get<GdinaParams>(m.params);
        Json rows = Json::array();
        for (int r = 0; r < t.items(); ++r) rows.push_back(std::vector<double>(t.row(r), t.row(r) + t.classes()));
        j["theta"] = rows;
    }
    return j;
}

Json to_json(const IdentifiabilityVerdict& v) {
    Json j;
    j["model"] = v.model == ModelFamily::Dina ? "dina" : "gdina";
    j["conditions"] = {{"A", v.conditions.A},
                       {"B", v.conditions.B},
                       {"C", v.conditions.C},
                       {"D", v.conditions.D},
                       {"E", v.conditions.E},
                       {"genericComplete", v.conditions.generic_complete}};
    j["scenario"] = scenario_name(v.scenario);
    j["label"] = scenario_label(v.scenario);
    j["constraints"] = v.constraints;
    j["notes"] = v.notes;
    Json also = Json::array();
    for (auto s : v.also_applicable) also.push_back(scenario_name(s));
    j["alsoApplicable"] = also;
    return j;
}

Json to_json(const FitResult& f) {
    Json j = model_to_json(f.model);
    j["loglik"] = f.loglik;
    j["iterations"] = f.iterations;
    j["converged"] = f.converged;
    j["monotonicityOk"] = f.monotonicity_ok;
    j["stringentOk"] = f.stringent_ok;
    j["restart"] = f.restart;
    return j;
}

Json to_json(const WitnessPair& w) {
    Json j;
    j["construction"] = construction_name(w.construction);
    j["truth"] = model_to_json(w.truth);
    j["alternative"] = model_to_json(w.alternative);
    j["maxDiff"] = w.certified_max_diff;
    j["exact"] = w.exact;
    j["certified"] = is_certified(w);
    j["qEquivalent"] = q_equivalent(w.truth.q, w.alternative.q);
    j["pivotAttributes"] = w.pivot_attributes;
    j["pivotItems"] = w.pivot_items;
    return j;
}

Json to_json(const SearchReport& r) {
    Json j;
    Json cands = Json::array();
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
        const auto& c = r.candidates[i];
        Json cj;
        cj["index"] = i;
        cj["q"] = c.q.compact();
        cj["eligible"] = c.eligible;
        if (c.fit) {
            cj["loglik"] = c.fit->loglik;
            cj["stringentOk"] = c.fit->stringent_ok;
            cj["converged"] = c.fit->converged;
        } else {
            cj["error"] = c.error;
        }
        cands.push_back(cj);
    }
    j["candidates"] = cands;
    j["argmax"] = r.argmax;
    j["gap"] = r.gap;
    if (r.argmax >= 0) j["best"] = to_json(*r.candidates[r.argmax].fit);
    return j;
}

Json to_json(const MseReport& r) {
    Json j;
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"truth", row.truth},
                        {"n", row.n},
                        {"replications", row.replications},
                        {"mseS", row.mse_s},
                        {"mseG", row.mse_g},
                        {"mseP", row.mse_p},
                        {"mseTheta", row.mse_theta},
                        {"constraintDistance", row.constraint_distance}});
    j["rows"] = rows;
    Json truths = Json::array();
    for (const auto& t : r.truths) truths.push_back(model_to_json(t));
    j["truths"] = truths;
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace qident
