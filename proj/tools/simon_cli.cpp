// Command-line front end: oracle emission, game simulation, bound tables,
// counts ingestion, scaling fits, and verdict reports.
//
// Exit codes: 0 ok, 2 usage, 3 data, 4 resource, 5 numerical.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "simon/game.hpp"
#include "simon/gf2.hpp"
#include "simon/infotheory.hpp"
#include "simon/oracle.hpp"
#include "simon/players.hpp"
#include "simon/statfit.hpp"

using json = nlohmann::json;

namespace {

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw simon::ResourceError("cannot open output file: " + path);
    out << content;
    if (!out.flush()) throw simon::ResourceError("short write to: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw simon::DataError("cannot open input file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    return out;
}

double parse_double(const std::string& text, int lineno) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw simon::DataError("line " + std::to_string(lineno) + ": bad number '" + text + "'");
    }
}

/// Flat key=value configuration file. Unknown keys are rejected so typos
/// cannot silently fall back to defaults.
std::map<std::string, std::string> parse_config(const std::string& path,
                                                const std::vector<std::string>& known) {
    std::map<std::string, std::string> values;
    std::istringstream in(read_file(path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw simon::DataError(path + " line " + std::to_string(lineno) +
                                   ": expected key=value");
        const std::string key = line.substr(0, eq);
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw simon::DataError(path + " line " + std::to_string(lineno) +
                                   ": unknown key '" + key + "'");
        values[key] = line.substr(eq + 1);
    }
    return values;
}

// ---------------------------------------------------------------------------
// oracle

void cmd_oracle(int n, int i, const std::string& out_path) {
    write_file(out_path, simon::emit_circuit_text(simon::build_canonical_circuit(n, i)));
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
    int n = 3;
    int w = 3;
    std::uint64_t rounds = 1000; // per Hamming weight
    std::uint64_t seed = 1;
    std::string player = "ideal"; // ideal | agent
    double lambda = 0.0;
    double threshold = 0.0; // 0 = default (1 + 1/N_w)/2
    std::string rounds_path;
    std::string summary_path;
};

void cmd_simulate(const SimulateOptions& opt) {
    if (opt.n < 1 || opt.w < 1 || opt.w > opt.n)
        throw simon::UsageError("simulate: need 1 <= w <= n");
    if (opt.rounds < 1) throw simon::UsageError("simulate: rounds must be positive");
    if (opt.player != "ideal" && opt.player != "agent")
        throw simon::UsageError("simulate: player must be 'ideal' or 'agent'");

    const auto cfg = simon::GameConfig::make(opt.n, opt.w);
    const auto candidates = simon::enumerate_candidates(opt.n, opt.w);
    const auto model = opt.lambda > 0.0 ? simon::NoiseModel::quadratic(opt.lambda)
                                        : simon::NoiseModel::perfect();
    const double threshold =
        opt.threshold > 0.0 ? opt.threshold : simon::default_threshold(cfg.num_candidates);
    const double q_max = opt.lambda * static_cast<double>(opt.w) * static_cast<double>(opt.w);
    const std::uint64_t cap = simon::default_max_queries(cfg.num_candidates, q_max);

    std::ostringstream csv;
    csv << "n,w,hw_b,queries,score,correct\n";
    std::vector<double> mean_queries(static_cast<std::size_t>(opt.w), 0.0);
    std::vector<double> success(static_cast<std::size_t>(opt.w), 0.0);
    std::uint64_t forced_rounds = 0;

    // One representative hidden string per Hamming weight.
    for (int i = 1; i <= opt.w; ++i) {
        const simon::BitString truth = simon::BitString::tail_ones(opt.n, i);
        double query_sum = 0.0;
        std::uint64_t correct = 0;
        for (std::uint64_t r = 0; r < opt.rounds; ++r) {
            auto rng = simon::Rng::stream(opt.seed,
                                          static_cast<std::uint64_t>(i) << 32 | r);
            std::uint64_t queries = 0;
            simon::BitString guess = truth;
            if (opt.player == "ideal") {
                queries = simon::ideal_player_run(truth, candidates, rng);
            } else {
                const auto result =
                    simon::noisy_agent_run(truth, candidates, model, threshold, cap, rng);
                queries = result.queries;
                guess = result.guess;
                if (result.forced) ++forced_rounds;
            }
            const double score = simon::score_guess(guess, truth, cfg);
            query_sum += static_cast<double>(queries);
            if (guess == truth) ++correct;
            csv << opt.n << ',' << opt.w << ',' << i << ',' << queries << ','
                << format_double(score) << ',' << (guess == truth ? 1 : 0) << '\n';
        }
        mean_queries[static_cast<std::size_t>(i - 1)] =
            query_sum / static_cast<double>(opt.rounds);
        success[static_cast<std::size_t>(i - 1)] =
            static_cast<double>(correct) / static_cast<double>(opt.rounds);
    }
    write_file(opt.rounds_path, csv.str());

    json summary;
    summary["n"] = opt.n;
    summary["w"] = opt.w;
    summary["num_candidates"] = cfg.num_candidates;
    summary["rounds_per_hw"] = opt.rounds;
    summary["seed"] = opt.seed;
    summary["player"] = opt.player;
    summary["lambda"] = opt.lambda;
    summary["threshold"] = threshold;
    summary["forced_rounds"] = forced_rounds;
    summary["mean_queries_per_hw"] = mean_queries;
    summary["success_prob_per_hw"] = success;
    const double nts_value = simon::nts_weighted(mean_queries, success, opt.n, opt.w);
    summary["nts"] = std::isinf(nts_value) ? json("inf") : json(nts_value);
    write_file(opt.summary_path, summary.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// bounds

void cmd_bounds(int n_min, int n_max, int w, double q, std::uint64_t heuristic_budget,
                std::uint64_t seed, const std::string& out_path) {
    if (n_min < 1 || n_max < n_min) throw simon::UsageError("bounds: bad n range");
    if (w < 1) throw simon::UsageError("bounds: w must be positive");
    std::ostringstream csv;
    csv << "n,w,Nw,k_min,nts_c_lb,heuristic_ub,gap,nts_iq_interp,theorem3_bound\n";
    for (int n = std::max(n_min, w); n <= n_max; ++n) {
        const std::uint64_t nw = simon::candidate_count(n, w);
        const auto bounds = simon::classical_bounds(nw);
        std::string ub = "", gap = "";
        if (n <= 12 && nw <= 4096 && nw >= 2) {
            const auto candidates = simon::enumerate_candidates(n, w);
            const auto seq = simon::heuristic_sequence_search(candidates, heuristic_budget, seed);
            const double value = simon::classical_nts_exact(seq, candidates);
            ub = format_double(value);
            gap = format_double(value - bounds.nts_lb);
        }
        csv << n << ',' << w << ',' << nw << ',' << bounds.k_min << ','
            << format_double(bounds.nts_lb) << ',' << ub << ',' << gap << ','
            << format_double(simon::nts_iq_interpolated(n, w)) << ','
            << format_double(simon::nts_q_upper_bound(n, w, q)) << '\n';
    }
    write_file(out_path, csv.str());
}

// ---------------------------------------------------------------------------
// ingest

simon::Histogram parse_counts_csv(const std::string& path) {
    simon::Histogram counts;
    std::istringstream in(read_file(path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("bitstring", 0) == 0) continue; // header
        const auto fields = split(line, ',');
        if (fields.size() != 2)
            throw simon::DataError(path + " line " + std::to_string(lineno) +
                                   ": expected bitstring,count");
        for (char c : fields[0])
            if (c != '0' && c != '1')
                throw simon::DataError(path + " line " + std::to_string(lineno) +
                                       ": bad bitstring '" + fields[0] + "'");
        const double value = parse_double(fields[1], lineno);
        if (value < 0.0)
            throw simon::DataError(path + " line " + std::to_string(lineno) +
                                   ": negative count");
        counts[fields[0]] += value;
    }
    if (counts.empty()) throw simon::DataError(path + ": no counts");
    return counts;
}

void cmd_ingest(const std::vector<std::string>& inputs, bool full_keys, int reduce_m,
                const std::string& out_path) {
    std::ostringstream csv;
    csv << "b,hw,q,p,f\n";
    for (const auto& spec : inputs) {
        const auto colon = spec.rfind(':');
        if (colon == std::string::npos)
            throw simon::UsageError("ingest: inputs take the form counts.csv:<b bits>");
        const std::string path = spec.substr(0, colon);
        simon::BitString b = simon::BitString::parse(spec.substr(colon + 1));
        auto counts = parse_counts_csv(path);
        const int n = b.length();

        if (reduce_m > 0) {
            if (!full_keys)
                throw simon::UsageError("ingest: --reduce requires --full-keys histograms");
            if (reduce_m >= n) throw simon::UsageError("ingest: --reduce must be < n");
            for (int j = 0; j < n - reduce_m; ++j)
                if (b.bit(j))
                    throw simon::DataError(
                        "ingest: hidden string has support outside the reduced window");
            counts = simon::reduce_counts(counts, n, reduce_m);
            const std::uint64_t mask = (std::uint64_t{1} << reduce_m) - 1;
            b = simon::BitString(b.word() & mask, reduce_m);
        }
        // With full 2n-bit keys, the z histogram is the data-half marginal.
        if (full_keys) {
            simon::Histogram data_only;
            const auto m = static_cast<std::size_t>(b.length());
            for (const auto& [key, value] : counts) {
                if (key.size() != 2 * m)
                    throw simon::DataError("ingest: key '" + key + "' is not 2n bits");
                data_only[key.substr(0, m)] += value;
            }
            counts = std::move(data_only);
        }

        const auto est = simon::extract_pq(counts, b);
        double total = 0.0, consistent = 0.0;
        for (const auto& [key, value] : counts) {
            total += value;
            if (simon::dot_mod2(simon::BitString::parse(key), b) == 0) consistent += value;
        }
        csv << b.str() << ',' << simon::hamming_weight(b) << ',' << format_double(est.q) << ','
            << (est.p_defined ? format_double(est.p) : std::string("undefined")) << ','
            << format_double(consistent / total) << '\n';
    }
    write_file(out_path, csv.str());
}

// ---------------------------------------------------------------------------
// fit

simon::ScalingModel model_from_name(const std::string& name) {
    if (name == "polylog") return simon::ScalingModel::polylog;
    if (name == "poly") return simon::ScalingModel::poly;
    if (name == "mixed") return simon::ScalingModel::mixed;
    throw simon::UsageError("unknown model '" + name + "'");
}

json report_to_json(const simon::FitReport& report) {
    json j;
    j["model"] = simon::model_name(report.model);
    j["params"] = report.params;
    j["stderrs"] = report.stderrs;
    j["t"] = report.t_stats;
    j["p"] = report.p_values;
    j["ss_res"] = report.ss_res;
    j["r2"] = report.r2;
    j["adj_r2"] = report.adj_r2;
    j["aic"] = report.aic;
    j["aicc"] = std::isinf(report.aicc) ? json("inf") : json(report.aicc);
    j["bic"] = report.bic;
    j["dof"] = report.dof;
    j["converged"] = report.converged;
    return j;
}

const char* verdict_name(simon::Verdict v) {
    switch (v) {
        case simon::Verdict::polylog: return "polylog";
        case simon::Verdict::poly: return "poly";
        case simon::Verdict::tie: return "tie";
    }
    return "?";
}

void cmd_fit(const std::string& csv_path, const std::vector<std::string>& model_names,
             int drop_first, const std::string& json_path, const std::string& md_path) {
    // Input CSV: w,log2Nw,nts_mean,nts_std.
    std::map<int, std::vector<simon::ScalingPoint>> per_w;
    std::istringstream in(read_file(csv_path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("w,", 0) == 0) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 4)
            throw simon::DataError(csv_path + " line " + std::to_string(lineno) +
                                   ": expected w,log2Nw,nts_mean,nts_std");
        const int w = static_cast<int>(parse_double(fields[0], lineno));
        per_w[w].push_back({parse_double(fields[1], lineno), parse_double(fields[2], lineno),
                            parse_double(fields[3], lineno)});
    }
    if (per_w.empty()) throw simon::DataError(csv_path + ": no data rows");

    json out;
    std::ostringstream md;
    md << "| w | model | params | R2 | adj R2 | AIC | AICc | BIC | t | p |\n";
    md << "|---|-------|--------|----|--------|-----|------|-----|---|---|\n";
    std::vector<std::pair<int, simon::Verdict>> verdicts;
    for (auto& [w, points] : per_w) {
        std::sort(points.begin(), points.end(),
                  [](const auto& a, const auto& b) { return a.x < b.x; });
        simon::ScalingDataset data(points, "w=" + std::to_string(w));
        if (drop_first > 0) data = data.drop_first(static_cast<std::size_t>(drop_first));
        std::map<std::string, simon::FitReport> reports;
        for (const auto& name : model_names)
            reports.emplace(name, simon::fit(model_from_name(name), data));
        json entry;
        for (const auto& [name, report] : reports) {
            entry[name] = report_to_json(report);
            md << "| " << w << " | " << name << " | ";
            for (std::size_t k = 0; k < report.params.size(); ++k)
                md << (k ? " " : "") << format_double(report.params[k]);
            md << " | " << format_double(report.r2) << " | " << format_double(report.adj_r2)
               << " | " << format_double(report.aic) << " | " << format_double(report.aicc)
               << " | " << format_double(report.bic) << " | "
               << format_double(report.exponent_t()) << " | "
               << format_double(report.exponent_p()) << " |\n";
        }
        if (reports.count("polylog") && reports.count("poly")) {
            const auto verdict =
                simon::model_select(reports.at("polylog"), reports.at("poly"));
            entry["verdict"] = verdict_name(verdict.majority);
            entry["votes_polylog"] = verdict.polylog_votes;
            entry["votes_poly"] = verdict.poly_votes;
            entry["polylog_akaike_weight"] = verdict.polylog_akaike_weight;
            verdicts.emplace_back(w, verdict.majority);
        }
        out["w" + std::to_string(w)] = entry;
    }
    if (!verdicts.empty()) {
        md << "\n";
        for (const auto& [w, v] : verdicts)
            md << "- w=" << w << ": majority " << verdict_name(v) << "\n";
        const auto wt = simon::transition_weight(verdicts);
        out["transition_weight"] = wt ? json(*wt) : json(nullptr);
        md << "- transition weight w_t: " << (wt ? std::to_string(*wt) : "none") << "\n";
    }
    if (!json_path.empty()) write_file(json_path, out.dump(2) + "\n");
    write_file(md_path, md.str());
}

// ---------------------------------------------------------------------------
// report (verdicts from published information-criterion tables)

void cmd_report(const std::string& csv_path, const std::string& out_path) {
    // Input CSV: w,aic_polylog,aic_poly.
    std::istringstream in(read_file(csv_path));
    std::string line;
    int lineno = 0;
    std::vector<std::pair<int, simon::Verdict>> verdicts;
    std::ostringstream md;
    md << "| w | AIC polylog | AIC poly | winner | polylog weight |\n";
    md << "|---|-------------|----------|--------|----------------|\n";
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("w,", 0) == 0) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 3)
            throw simon::DataError(csv_path + " line " + std::to_string(lineno) +
                                   ": expected w,aic_polylog,aic_poly");
        const int w = static_cast<int>(parse_double(fields[0], lineno));
        const double a_polylog = parse_double(fields[1], lineno);
        const double a_poly = parse_double(fields[2], lineno);
        const auto winner = a_polylog < a_poly   ? simon::Verdict::polylog
                            : a_poly < a_polylog ? simon::Verdict::poly
                                                 : simon::Verdict::tie;
        verdicts.emplace_back(w, winner);
        const auto weights = simon::akaike_weights({a_polylog, a_poly});
        md << "| " << w << " | " << format_double(a_polylog) << " | " << format_double(a_poly)
           << " | " << verdict_name(winner) << " | " << format_double(weights[0]) << " |\n";
    }
    if (verdicts.empty()) throw simon::DataError(csv_path + ": no data rows");
    const auto wt = simon::transition_weight(verdicts);
    md << "\n- transition weight w_t: " << (wt ? std::to_string(*wt) : "none") << "\n";
    write_file(out_path, md.str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Restricted-Hamming-weight Simon guessing game toolkit"};
    app.require_subcommand(1);

    // oracle
    auto* oracle = app.add_subcommand("oracle", "emit a canonical oracle circuit");
    int oracle_n = 3, oracle_i = 1;
    std::string oracle_out;
    oracle->add_option("--n", oracle_n, "problem size")->required();
    oracle->add_option("--i", oracle_i, "Hamming weight of the hidden string")->required();
    oracle->add_option("--out", oracle_out, "output path (default stdout)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run scored game rounds");
    SimulateOptions sim;
    std::string sim_config;
    simulate->add_option("--config", sim_config, "key=value config file");
    auto* opt_n = simulate->add_option("--n", sim.n);
    auto* opt_w = simulate->add_option("--w", sim.w);
    auto* opt_rounds = simulate->add_option("--rounds", sim.rounds, "rounds per HW");
    auto* opt_seed = simulate->add_option("--seed", sim.seed);
    auto* opt_player = simulate->add_option("--player", sim.player, "ideal|agent");
    auto* opt_lambda = simulate->add_option("--lambda", sim.lambda, "hw-quadratic noise rate");
    auto* opt_threshold = simulate->add_option("--threshold", sim.threshold);
    simulate->add_option("--rounds-out", sim.rounds_path, "rounds CSV path");
    simulate->add_option("--summary-out", sim.summary_path, "summary JSON path");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "closed-form bound table");
    int bounds_nmin = 2, bounds_nmax = 10, bounds_w = 1;
    double bounds_q = 0.0;
    std::uint64_t bounds_budget = 200, bounds_seed = 1;
    std::string bounds_out;
    bounds->add_option("--n-min", bounds_nmin);
    bounds->add_option("--n-max", bounds_nmax);
    bounds->add_option("--w", bounds_w)->required();
    bounds->add_option("--q", bounds_q, "noise exponent for the query-cost ceiling");
    bounds->add_option("--budget", bounds_budget, "heuristic search iterations");
    bounds->add_option("--seed", bounds_seed);
    bounds->add_option("--out", bounds_out);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "extract p, q and calibration from counts");
    std::vector<std::string> ingest_inputs;
    bool ingest_full = false;
    int ingest_reduce = 0;
    std::string ingest_out;
    ingest->add_option("--input", ingest_inputs, "counts.csv:<b bits> (repeatable)")
        ->required();
    ingest->add_flag("--full-keys", ingest_full, "keys are 2n-bit data+ancilla strings");
    ingest->add_option("--reduce", ingest_reduce, "marginalize onto the trailing m bits");
    ingest->add_option("--out", ingest_out);

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "fit scaling models to an NTS dataset");
    std::string fit_csv, fit_json, fit_md;
    std::vector<std::string> fit_models = {"polylog", "poly"};
    int fit_drop = 0;
    std::uint64_t fit_bootstrap = 100000, fit_seed = 1;
    fit_cmd->add_option("--data", fit_csv, "CSV w,log2Nw,nts_mean,nts_std")->required();
    fit_cmd->add_option("--models", fit_models, "subset of polylog poly mixed");
    fit_cmd->add_option("--drop-first", fit_drop, "drop the first k points per w");
    fit_cmd->add_option("--bootstrap-B", fit_bootstrap)->group(""); // reserved
    fit_cmd->add_option("--seed", fit_seed)->group("");
    fit_cmd->add_option("--json-out", fit_json);
    fit_cmd->add_option("--md-out", fit_md);

    // report
    auto* report = app.add_subcommand("report", "verdict table from published AIC values");
    std::string report_csv, report_out;
    report->add_option("--aic-table", report_csv, "CSV w,aic_polylog,aic_poly")->required();
    report->add_option("--out", report_out);

    try {
        app.parse(argc, argv);

        if (*oracle) cmd_oracle(oracle_n, oracle_i, oracle_out);

        if (*simulate) {
            if (!sim_config.empty()) {
                const auto cfg = parse_config(
                    sim_config, {"n", "w", "rounds", "seed", "player", "lambda", "threshold"});
                const auto get = [&](const char* key, auto& target, const CLI::Option* flag) {
                    const auto it = cfg.find(key);
                    if (it == cfg.end() || flag->count() > 0) return; // CLI overrides file
                    std::istringstream value(it->second);
                    value >> target;
                    if (value.fail())
                        throw simon::DataError(std::string("bad config value for ") + key);
                };
                get("n", sim.n, opt_n);
                get("w", sim.w, opt_w);
                get("rounds", sim.rounds, opt_rounds);
                get("seed", sim.seed, opt_seed);
                get("player", sim.player, opt_player);
                get("lambda", sim.lambda, opt_lambda);
                get("threshold", sim.threshold, opt_threshold);
            }
            cmd_simulate(sim);
        }

        if (*bounds)
            cmd_bounds(bounds_nmin, bounds_nmax, bounds_w, bounds_q, bounds_budget, bounds_seed,
                       bounds_out);
        if (*ingest) cmd_ingest(ingest_inputs, ingest_full, ingest_reduce, ingest_out);
        if (*fit_cmd) cmd_fit(fit_csv, fit_models, fit_drop, fit_json, fit_md);
        if (*report) cmd_report(report_csv, report_out);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const simon::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const simon::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const simon::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << '\n';
        return 4;
    } catch (const simon::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 5;
    }
    return 0;
}
