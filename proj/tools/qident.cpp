// qident: identifiability checks, simulation, fitting and witnesses for
// restricted latent class models.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "qident/error.hpp"
#include "qident/estimate.hpp"
#include "qident/io.hpp"
#include "qident/tmatrix.hpp"
#include "qident/witness.hpp"

using namespace qident;
namespace fs = std::filesystem;

namespace {

struct Config {
    std::string command;
    std::string model = "dina";
    std::string q_path, data_path, params_path, output_path, out_dir, candidates_path, qbar_path, table_path;
    std::string construction = "q24";
    int restarts = 10;
    double tol = 1e-8;
    int max_iter = 2000;
    std::uint64_t seed = 1;
    int threads = 0;
    bool stringent = false;
    bool json = false;
    bool classify = false;
    bool include_zero_columns = false;
    int items = 5, attributes = 2;
    std::size_t n = 1000;
    double cbar = -1, gbar = -1;
    int count = 1;
    int truths = 30, replications = 20;
    std::vector<std::size_t> n_grid = {100, 1000, 10000};
};

Json manifest(const Config& c) {
    Json cfg = {{"model", c.model},   {"q", c.q_path},           {"data", c.data_path},
                {"params", c.params_path}, {"restarts", c.restarts}, {"tol", c.tol},
                {"maxIter", c.max_iter}, {"threads", c.threads},  {"stringent", c.stringent}};
    if (c.command == "enumerate") cfg["J"] = c.items, cfg["K"] = c.attributes;
    if (c.command == "simulate") cfg["n"] = c.n;
    if (c.command == "witness") cfg["construction"] = c.construction;
    if (c.command == "mse") cfg["truths"] = c.truths, cfg["replications"] = c.replications, cfg["nGrid"] = c.n_grid;
    return {{"schema", kSchema}, {"version", kVersion}, {"command", c.command}, {"seed", c.seed}, {"config", cfg}};
}

// JSON reports go to stdout with --json and to DIR/report.json with --out;
// the manifest rides along in both
void emit(const Config& c, Json report, const std::string& summary) {
    report["schema"] = kSchema;
    if (!c.out_dir.empty()) {
        fs::create_directories(c.out_dir);
        write_file((fs::path(c.out_dir) / "manifest.json").string(), dump(manifest(c)));
        write_file((fs::path(c.out_dir) / "report.json").string(), dump(report));
    }
    if (c.json) {
        report["manifest"] = manifest(c);
        std::cout << dump(report);
    } else {
        std::cout << summary;
    }
}

void write_side(const Config& c, const std::string& name, const std::string& content) {
    if (c.out_dir.empty()) return;
    fs::create_directories(c.out_dir);
    write_file((fs::path(c.out_dir) / name).string(), content);
}

Model load_model(const Config& c, const QMatrix& q) {
    Json j = Json::parse(read_file(c.params_path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::Parse, "parameter file is not a JSON object");
    if (!j.contains("model")) j["model"] = c.model;
    return model_from_json(j, q);
}

std::string check_summary(const IdentifiabilityVerdict& v) {
    std::string s = scenario_label(v.scenario);
    if (v.scenario != Scenario::StrictlyIdentifiable) s += "; not strict";
    for (const auto& con : v.constraints) s += "; constraint: " + con;
    return s;
}

int cmd_check(const Config& c) {
    auto raw = read_qmatrix(c.q_path);
    auto stripped = strip_zero_rows(raw);
    auto kind = parse_model(c.model);
    // DINO is DINA on complemented attributes; the conditions read the same Q
    auto v = kind == ModelKind::Gdina ? classify_gdina(stripped.q) : classify_dina(stripped.q);
    if (!stripped.removed.empty())
        v.notes.push_back("removed " + std::to_string(stripped.removed.size()) + " all-zero row(s)");
    std::ostringstream out;
    out << check_summary(v) << "\n";
    const auto& f = v.conditions;
    auto yn = [](bool b) { return b ? "yes" : "no"; };
    out << "conditions: A=" << yn(f.A) << " B=" << yn(f.B) << " C=" << yn(f.C) << " D=" << yn(f.D)
        << " E=" << yn(f.E) << " generic-complete=" << yn(f.generic_complete) << "\n";
    for (auto s : v.also_applicable) out << "also: " << scenario_label(s) << "\n";
    for (const auto& n : v.notes) out << "note: " << n << "\n";
    Json j = to_json(v);
    j["q"] = q_to_json(stripped.q);
    j["removedRows"] = stripped.removed;
    emit(c, j, out.str());
    return 0;
}

int cmd_enumerate(const Config& c) {
    auto all = enumerate_canonical(c.items, c.attributes, c.include_zero_columns);
    std::string csv = c.classify ? "index,q,scenario,label\n" : "index,q\n";
    Json rows = Json::array();
    for (std::size_t i = 0; i < all.size(); ++i) {
        csv += std::to_string(i + 1) + "," + all[i].to_string(";");
        Json r = {{"index", i + 1}, {"q", all[i].to_string(";")}};
        if (c.classify) {
            auto v = classify_dina(all[i]);
            csv += std::string(",") + scenario_name(v.scenario) + "," + scenario_label(v.scenario);
            r["scenario"] = scenario_name(v.scenario);
        }
        csv += "\n";
        rows.push_back(r);
    }
    write_side(c, "enumerate.csv", csv);
    emit(c, {{"count", all.size()}, {"matrices", rows}}, csv);
    return 0;
}

int cmd_simulate(const Config& c) {
    auto q = read_qmatrix(c.q_path);
    auto m = load_model(c, q);
    validate_model(m, false);
    auto d = simulate(m, c.n, c.seed);
    auto csv = dataset_to_csv(d);
    if (!c.output_path.empty()) write_file(c.output_path, csv);
    write_side(c, "data.csv", csv);
    if (c.json) {
        emit(c, {{"n", d.size()}, {"items", d.items}, {"output", c.output_path}}, "");
    } else {
        if (c.output_path.empty()) std::cout << csv;
        if (!c.out_dir.empty()) write_file((fs::path(c.out_dir) / "manifest.json").string(), dump(manifest(c)));
    }
    return 0;
}

EmOptions em_options(const Config& c) {
    EmOptions o;
    o.tol = c.tol;
    o.max_iter = c.max_iter;
    return o;
}

int cmd_fit(const Config& c) {
    auto q = read_qmatrix(c.q_path);
    auto data = read_dataset(c.data_path).tabulate();
    auto fit = multistart_fit(parse_model(c.model), q, data, c.restarts, c.seed, em_options(c), c.threads);
    std::ostringstream out;
    out.precision(10);
    out << "loglik " << fit.loglik << " after " << fit.iterations << " iterations"
        << (fit.converged ? "" : " (not converged)") << ", restart " << fit.restart << "\n";
    out << "monotone " << (fit.monotonicity_ok ? "yes" : "no") << ", stringent " << (fit.stringent_ok ? "yes" : "no")
        << "\n";
    emit(c, to_json(fit), out.str());
    return 0;
}

int cmd_search(const Config& c) {
    auto data = read_dataset(c.data_path).tabulate();
    if (data.items == 0) throw Error(ErrorCode::EmptyData, "dataset has no items");
    std::vector<QMatrix> cands;
    if (!c.candidates_path.empty()) {
        // one candidate per line in the compact "0 1;1 1" form, '#' comments
        std::istringstream in(read_file(c.candidates_path));
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto comma = line.find(',');
            // accept rows copied from enumerate output (index,q[,scenario,...])
            if (comma != std::string::npos) {
                auto rest = line.substr(comma + 1);
                line = rest.substr(0, rest.find(','));
            }
            cands.push_back(parse_qmatrix(line));
        }
    } else {
        cands = enumerate_canonical(data.items, c.attributes);
    }
    auto rep = exhaustive_search(parse_model(c.model), data, cands, c.restarts, c.stringent, c.seed, em_options(c),
                                 c.threads);
    std::string csv = "index,q,loglik,eligible\n";
    for (std::size_t i = 0; i < rep.candidates.size(); ++i) {
        const auto& cand = rep.candidates[i];
        std::ostringstream row;
        row.precision(17);
        row << i + 1 << "," << cand.q.to_string(";") << ",";
        if (cand.fit) row << cand.fit->loglik;
        row << "," << (cand.eligible ? 1 : 0) << "\n";
        csv += row.str();
    }
    write_side(c, "search.csv", csv);
    std::ostringstream out;
    out.precision(10);
    if (rep.argmax >= 0) {
        const auto& best = rep.candidates[rep.argmax];
        out << "argmax " << rep.argmax + 1 << ": " << best.q.to_string(";") << " loglik " << best.fit->loglik
            << " gap " << rep.gap << "\n";
    } else {
        out << "no eligible candidate\n";
    }
    emit(c, to_json(rep), out.str());
    return 0;
}

std::string table_csv(const WitnessPair& w) {
    if (w.truth.q.items() > 16) throw Error(ErrorCode::TooLarge, "probability tables need J <= 16");
    auto a = full_distribution(w.truth), b = full_distribution(w.alternative);
    std::ostringstream out;
    out.precision(17);
    out << "r,truth,alternative\n";
    for (std::size_t r = 0; r < a.size(); ++r) out << r << "," << a[r] << "," << b[r] << "\n";
    return out.str();
}

int cmd_witness(const Config& c) {
    std::vector<WitnessPair> ws;
    const auto& k = c.construction;
    std::mt19937_64 rng(c.seed);
    if (k == "q24") {
        QMatrix q = c.q_path.empty() ? q4x2() : read_qmatrix(c.q_path);
        if (q != q4x2()) throw Error(ErrorCode::WrongShape, "the q24 construction works on (1 0;0 1;1 0;0 1)");
        auto m = load_model(c, q);
        ws = dina_q24_two_solutions(std::get<DinaParams>(m.params), m.p);
    } else {
        auto q = read_qmatrix(c.q_path);
        auto m = load_model(c, q);
        if (k == "one-item") {
            ws.push_back(dina_one_item_attr(q, std::get<DinaParams>(m.params), m.p, c.cbar));
        } else if (k == "scenario-a") {
            ws.push_back(dina_scenario_a(q, std::get<DinaParams>(m.params), m.p, c.gbar));
        } else if (k == "gamma-merge") {
            ws.push_back(incomplete_gamma_merge(q, read_qmatrix(c.qbar_path), std::get<DinaParams>(m.params), m.p));
        } else if (k == "gdina-two") {
            ws = gdina_two_item_attr(q, theta_table(m), m.p, c.count, rng);
        } else if (k == "gdina-one") {
            // free row drawn near the truth, kept monotone by sorting along
            // mastery counts
            auto theta = theta_table(m);
            int j = -1;
            for (int kk = 0; kk < q.attributes() && j < 0; ++kk)
                if (q.column_sum(kk) == 1)
                    for (int jj = 0; jj < q.items(); ++jj)
                        if (q.at(jj, kk)) j = jj;
            if (j < 0) throw Error(ErrorCode::WrongShape, "no attribute is required by a single item");
            std::uniform_real_distribution<double> u(-0.05, 0.05);
            for (int tries = 0; static_cast<int>(ws.size()) < c.count; ++tries) {
                if (tries > 1000 * c.count) throw Error(ErrorCode::InvalidFreeValues, "no valid free values found");
                std::vector<double> row(theta.row(j), theta.row(j) + theta.classes());
                for (auto& v : row) v += u(rng);
                try {
                    ws.push_back(gdina_one_item_attr(q, theta, m.p, row));
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::InvalidFreeValues && e.code() != ErrorCode::NotCertified) throw;
                }
            }
        } else {
            throw Error(ErrorCode::InvalidParameters, "unknown construction '" + k + "'");
        }
    }
    Json arr = Json::array();
    std::ostringstream out;
    int certified = 0;
    double worst = 0;
    for (const auto& w : ws) {
        arr.push_back(to_json(w));
        certified += is_certified(w);
        worst = std::max(worst, w.certified_max_diff);
    }
    out << certified << "/" << ws.size() << " certified " << construction_name(ws.front().construction)
        << " witness(es), max diff " << worst << "\n";
    if (!c.table_path.empty()) write_file(c.table_path, table_csv(ws.front()));
    emit(c, {{"witnesses", arr}, {"certified", certified}}, out.str());
    return 0;
}

int cmd_tmatrix(const Config& c) {
    auto q = read_qmatrix(c.q_path);
    if (q.items() > 12) throw Error(ErrorCode::TooLarge, "T-matrix export needs J <= 12");
    auto m = load_model(c, q);
    auto t = build_t(m);
    std::ostringstream out;
    out.precision(17);
    out << "r";
    for (Eigen::Index a = 0; a < t.cols(); ++a) out << "," << a;
    out << "\n";
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
        out << r;
        for (Eigen::Index a = 0; a < t.cols(); ++a) out << "," << t(r, a);
        out << "\n";
    }
    if (!c.output_path.empty()) write_file(c.output_path, out.str());
    write_side(c, "tmatrix.csv", out.str());
    emit(c, {{"rows", t.rows()}, {"cols", t.cols()}, {"rank", rank(t)}},
         c.output_path.empty() ? out.str() : "rank " + std::to_string(rank(t)) + "\n");
    return 0;
}

int cmd_mse(const Config& c) {
    auto q = read_qmatrix(c.q_path);
    auto rep = mse_experiment(q, default_truth_sampler(q), c.truths, c.n_grid, c.replications, c.seed, c.restarts,
                              em_options(c), c.threads);
    std::ostringstream csv;
    csv.precision(17);
    csv << "truth,n,mse_s,mse_g,mse_p,mse_theta,constraint_distance\n";
    for (const auto& r : rep.rows)
        csv << r.truth << "," << r.n << "," << r.mse_s << "," << r.mse_g << "," << r.mse_p << "," << r.mse_theta << ","
            << r.constraint_distance << "\n";
    write_side(c, "mse.csv", csv.str());
    emit(c, to_json(rep), csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Config c;
    CLI::App app{"qident: identifiability of restricted latent class models"};
    app.footer(
        "Patterns are little-endian: bit k of an attribute pattern is attribute k+1 and bit j of a\n"
        "response pattern is item j+1. CSV bit strings list item 1 first.\n"
        "Exit status: 0 success, 1 input/output or parse error, 2 domain error.");
    app.require_subcommand(1);
    app.add_option("--model", c.model, "dina, dino or gdina")->capture_default_str();
    app.add_option("--seed", c.seed, "random seed")->capture_default_str();
    app.add_option("--threads", c.threads, "worker threads (0 = hardware)")->capture_default_str();
    app.add_option("--out", c.out_dir, "directory for manifest.json and reports");
    app.add_flag("--json", c.json, "print the JSON report");

    auto common = [&](CLI::App* s) {
        s->add_option("--model", c.model, "dina, dino or gdina");
        s->add_option("--seed", c.seed, "random seed");
        s->add_option("--threads", c.threads, "worker threads");
        s->add_option("--out", c.out_dir, "output directory");
        s->add_flag("--json", c.json, "print the JSON report");
    };
    auto fit_opts = [&](CLI::App* s) {
        s->add_option("--restarts", c.restarts, "EM random starts")->capture_default_str();
        s->add_option("--tol", c.tol, "log-likelihood increment tolerance")->capture_default_str();
        s->add_option("--max-iter", c.max_iter, "EM iteration cap")->capture_default_str();
    };

    auto* check = app.add_subcommand("check", "check identifiability conditions of a Q-matrix");
    check->add_option("--q", c.q_path, "Q-matrix file")->required();
    common(check);

    auto* en = app.add_subcommand("enumerate", "list J x K Q-matrices up to column permutation");
    en->add_option("--J,--items", c.items)->required();
    en->add_option("--K,--attributes", c.attributes)->required();
    en->add_flag("--classify", c.classify, "add the DINA verdict");
    en->add_flag("--include-zero-columns", c.include_zero_columns);
    common(en);

    auto* sim = app.add_subcommand("simulate", "draw a dataset");
    sim->add_option("--q", c.q_path)->required();
    sim->add_option("--params", c.params_path, "JSON with model, s/g or theta, p")->required();
    sim->add_option("--n", c.n)->capture_default_str();
    sim->add_option("-o,--output", c.output_path, "CSV file (default stdout)");
    common(sim);

    auto* fit = app.add_subcommand("fit", "EM fit at a fixed Q");
    fit->add_option("--q", c.q_path)->required();
    fit->add_option("--data", c.data_path)->required();
    fit_opts(fit);
    common(fit);

    auto* search = app.add_subcommand("search", "fit every candidate Q and rank by log-likelihood");
    search->add_option("--data", c.data_path)->required();
    search->add_option("--candidates", c.candidates_path, "one Q per line; default: all canonical J x K");
    search->add_option("--K,--attributes", c.attributes)->capture_default_str();
    search->add_flag("--stringent", c.stringent, "drop fits violating the stringent order");
    fit_opts(search);
    common(search);

    auto* wit = app.add_subcommand("witness", "build an alternative model with the same distribution");
    wit->add_option("--construction", c.construction)
        ->check(CLI::IsMember({"q24", "one-item", "scenario-a", "gdina-one", "gdina-two", "gamma-merge"}))
        ->capture_default_str();
    wit->add_option("--q", c.q_path);
    wit->add_option("--params", c.params_path)->required();
    wit->add_option("--qbar", c.qbar_path, "target Q for gamma-merge");
    wit->add_option("--cbar", c.cbar, "one-item: new 1-s");
    wit->add_option("--gbar", c.gbar, "scenario-a: new guessing value");
    wit->add_option("--count", c.count, "gdina-one/gdina-two: number of witnesses")->capture_default_str();
    wit->add_option("--table", c.table_path, "write the two probability tables as CSV (J <= 16)");
    common(wit);

    auto* tm = app.add_subcommand("tmatrix", "export T(Q, theta) as CSV");
    tm->add_option("--q", c.q_path)->required();
    tm->add_option("--params", c.params_path)->required();
    tm->add_option("-o,--output", c.output_path);
    common(tm);

    auto* mse = app.add_subcommand("mse", "MSE against sample size for random DINA truths");
    mse->add_option("--q", c.q_path)->required();
    mse->add_option("--truths", c.truths)->capture_default_str();
    mse->add_option("--reps", c.replications)->capture_default_str();
    mse->add_option("--n", c.n_grid)->capture_default_str();
    fit_opts(mse);
    common(mse);

    CLI11_PARSE(app, argc, argv);
    try {
        c.command = app.get_subcommands().front()->get_name();
        if (c.command == "check") return cmd_check(c);
        if (c.command == "enumerate") return cmd_enumerate(c);
        if (c.command == "simulate") return cmd_simulate(c);
        if (c.command == "fit") return cmd_fit(c);
        if (c.command == "search") return cmd_search(c);
        if (c.command == "witness") return cmd_witness(c);
        if (c.command == "tmatrix") return cmd_tmatrix(c);
        if (c.command == "mse") return cmd_mse(c);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_io() ? 1 : 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
