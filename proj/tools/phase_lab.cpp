// phase-lab command-line entry point.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "phaselab/coloring.hpp"
#include "phaselab/error.hpp"
#include "phaselab/generators.hpp"
#include "phaselab/harness.hpp"
#include "phaselab/mus.hpp"
#include "phaselab/solvers.hpp"

using namespace phaselab;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kRuntime = 2, kIo = 3 };

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed)
{
    if (seed)
        return *seed;
    std::random_device rd;
    const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "seed: " << s << "\n";
    return s;
}

/// Writes to `path`, or standard output when path is empty or "-".
void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    const fs::path p(path);
    std::error_code ec;
    if (p.has_parent_path())
        fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw IoError("cannot open for writing", path);
    out << text;
    if (!out)
        throw IoError("write failed", path);
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open for reading", path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// A single instance file, or every file with the extension in a directory
/// (sorted by name).
std::vector<fs::path> input_files(const std::string& in, const std::string& extension)
{
    const fs::path p(in);
    if (!fs::exists(p))
        throw IoError("no such file or directory", in);
    if (!fs::is_directory(p))
        return {p};
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(p))
        if (entry.is_regular_file() && entry.path().extension() == extension)
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw InputError("no " + extension + " files in " + in);
    return files;
}

Aggregate parse_aggregate(const std::string& text)
{
    if (text == "median")
        return Aggregate::median;
    if (text == "mean")
        return Aggregate::mean;
    throw InputError("aggregate must be median or mean");
}

std::vector<SolverKind> parse_solvers(const std::string& text)
{
    if (text == "both")
        return {SolverKind::chronological, SolverKind::dynamic};
    return {parse_solver(text)};
}

std::string rows_csv(const std::vector<ResultRow>& rows)
{
    SeriesResult s;
    s.rows = rows;
    return results_csv(s);
}

// ---------------------------------------------------------------- commands

struct GenerateArgs {
    int n = 10;
    int d = 3;
    int m = -1;
    std::string predicate = "any";
    std::string method = "generate-select";
    int count = 1;
    std::uint64_t max_attempts = 1'000'000;
    std::uint64_t swap_budget = 10'000;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
};

int run_generate(const GenerateArgs& a)
{
    if (a.count < 1)
        throw InputError("--count must be at least 1");
    const auto seed = resolve_seed(a.seed);
    GenSpec spec{{a.n, a.d, a.m}, parse_predicate(a.predicate), parse_method(a.method), a.max_attempts, 0,
                 a.swap_budget};
    spec.validate();
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec)
        throw IoError("cannot create output directory: " + ec.message(), a.out);
    std::uint64_t attempts = 0;
    for (int i = 0; i < a.count; ++i) {
        spec.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
        const auto result = generate_with_predicate(spec);
        attempts += result.attempts;
        char name[32];
        std::snprintf(name, sizeof name, "p%04d.csp", i);
        const auto path = (fs::path(a.out) / name).string();
        save_problem(path, result.problem);
        std::cout << path << "\n";
    }
    std::cerr << "generated " << a.count << " problems in " << attempts << " attempts\n";
    return kOk;
}

struct SolveArgs {
    std::string in;
    std::string solver = "dynamic";
    int runs = 10;
    std::string aggregate = "median";
    std::uint64_t node_cap = 0;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int run_solve(const SolveArgs& a)
{
    const auto seed = resolve_seed(a.seed);
    const auto files = input_files(a.in, ".csp");
    RunProtocol protocol{a.runs, seed, parse_aggregate(a.aggregate), a.node_cap};
    std::vector<CostRow> rows;
    for (auto solver : parse_solvers(a.solver)) {
        for (std::size_t i = 0; i < files.size(); ++i) {
            const auto problem = load_problem(files[i].string());
            rows.push_back({files[i].filename().string(), solver,
                            run_protocol(problem, solver, protocol, static_cast<std::uint64_t>(i))});
        }
    }
    emit(a.out, costs_csv(rows));
    return kOk;
}

struct CountArgs {
    std::string in;
    std::optional<std::uint64_t> cap;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int run_count(const CountArgs& a)
{
    const auto problem = load_problem(a.in);
    const auto count = count_solutions(problem, a.cap);
    emit(a.out, std::to_string(count.count) + (count.capped ? "+" : "") + "\n");
    return kOk;
}

struct MusArgs {
    std::string in;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int run_mus(const MusArgs& a)
{
    const auto files = input_files(a.in, ".csp");
    const bool single = !fs::is_directory(a.in);
    std::ostringstream csv;
    csv << "problem_id,m,mus_count,smallest_size,sizes\n";
    std::ostringstream listing;
    for (const auto& f : files) {
        const auto problem = load_problem(f.string());
        const auto report = enumerate_mus(problem);
        std::string sizes;
        for (auto s : report.mus_list) {
            if (!sizes.empty())
                sizes += ';';
            sizes += std::to_string(std::popcount(s));
            listing << "mus: " << format_subset(s) << "\n";
        }
        csv << f.filename().string() << ',' << problem.size() << ',' << report.count << ','
            << (report.smallest_size ? std::to_string(*report.smallest_size) : "") << ',' << sizes << '\n';
        if (single)
            listing << "mus_count: " << report.count << "\nsmallest_size: "
                    << (report.smallest_size ? std::to_string(*report.smallest_size) : "none") << "\n";
    }
    if (single && a.out.empty())
        emit("", listing.str());
    else
        emit(a.out, csv.str());
    return kOk;
}

struct ColorArgs {
    int nodes = 100;
    double gamma = 4.5;
    int samples = 1000;
    std::uint64_t node_cap = kDefaultColoringNodeCap;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string save_graphs;
};

int run_color(const ColorArgs& a)
{
    if (a.samples < 1)
        throw InputError("--samples must be at least 1");
    const auto seed = resolve_seed(a.seed);
    std::ostringstream csv;
    csv << "graph_id,gamma,edges,connected,status,nodes,seed\n";
    int colorable = 0;
    int censored = 0;
    for (int i = 0; i < a.samples; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        const auto g = random_graph(a.nodes, a.gamma, rng);
        const auto run = run_seed(seed, static_cast<std::uint64_t>(i), 0);
        const auto out = brelaz_backtrack(g, run, {a.node_cap});
        colorable += out.status == SearchStatus::solution ? 1 : 0;
        censored += out.status == SearchStatus::censored ? 1 : 0;
        const char* status = out.status == SearchStatus::solution     ? "colorable"
                             : out.status == SearchStatus::unsolvable ? "uncolorable"
                                                                      : "censored";
        csv << i << ',' << a.gamma << ',' << g.edge_count() << ',' << (is_connected(g) ? 1 : 0) << ',' << status
            << ',' << out.nodes << ',' << run << '\n';
        if (!a.save_graphs.empty()) {
            char name[32];
            std::snprintf(name, sizeof name, "g%04d.graph", i);
            fs::create_directories(a.save_graphs);
            save_graph((fs::path(a.save_graphs) / name).string(), g);
        }
    }
    emit(a.out, csv.str());
    std::cerr << "colorable " << colorable << " / " << a.samples << ", censored " << censored << "\n";
    return kOk;
}

struct ExperimentArgs {
    std::string preset;
    std::string config;
    std::optional<double> scale;
    bool paper_scale = false;
    bool include_long = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> node_cap;
    std::optional<std::uint64_t> max_attempts;
    std::optional<double> wall_time_cap;
    int workers = 0;
    std::string out;
};

int run_experiment_cmd(const ExperimentArgs& a)
{
    if (a.preset.empty() == a.config.empty())
        throw InputError("give exactly one of --preset or --config");
    ExperimentConfig config;
    if (!a.config.empty()) {
        config = config_from_json(read_text(a.config));
        if (a.scale || a.paper_scale) {
            if (config.preset == "custom")
                throw InputError("--scale applies to presets only");
            auto preset = preset_config(config.preset, a.paper_scale ? 1.0 : *a.scale);
            config.series = preset.series;
            config.scale = preset.scale;
        }
    } else {
        config = preset_config(a.preset, a.paper_scale ? 1.0 : a.scale.value_or(0.1));
    }
    if (a.seed)
        config.base_seed = *a.seed;
    else if (a.config.empty())
        config.base_seed = resolve_seed(std::nullopt);
    if (a.include_long)
        config.include_long = true;
    if (a.node_cap)
        config.node_cap = *a.node_cap;
    if (a.max_attempts)
        config.max_attempts = *a.max_attempts;
    if (a.wall_time_cap)
        config.wall_time_cap = *a.wall_time_cap;
    const int workers = a.workers > 0 ? a.workers : default_workers();
    auto table = run_experiment(config, a.out, workers, [](const std::string& line) { std::cerr << line << "\n"; });
    for (const auto& s : table.series)
        std::cout << (fs::path(a.out) / (s.name + ".csv")).string() << "\n";
    return kOk;
}

struct AnalyzeArgs {
    std::string in;
    std::string costs;
    double axis = 0.0;
    std::string aggregate = "median";
    std::optional<std::uint64_t> seed;
    std::string out;
};

int run_analyze(const AnalyzeArgs& a)
{
    if (a.in.empty() == a.costs.empty())
        throw InputError("give exactly one of --in (experiment directory) or --costs (costs.csv)");
    if (!a.costs.empty()) {
        const auto rows = parse_costs_csv(read_text(a.costs));
        if (rows.empty())
            throw InputError("costs file has no rows");
        emit(a.out, rows_csv(summarize_costs(rows, a.axis, parse_aggregate(a.aggregate))));
        return kOk;
    }
    if (!fs::is_directory(a.in))
        throw IoError("not an experiment directory", a.in);
    const auto table = analyze_experiment(a.in);
    if (a.out.empty() || a.out == "-") {
        for (const auto& s : table.series)
            std::cout << "# " << s.name << "\n" << results_csv(s);
        return kOk;
    }
    if (fs::exists(a.out) && fs::equivalent(a.out, a.in))
        throw InputError("--out must differ from --in");
    emit_results(table, a.out);
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"phase-lab: random CSP phase-transition experiments"};
    app.name("phase-lab");
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Generate random CSP instances");
    g->add_option("--n", gen.n, "Number of variables")->capture_default_str();
    g->add_option("--d", gen.d, "Domain size")->capture_default_str();
    g->add_option("--m", gen.m, "Number of nogoods")->required();
    g->add_option("--predicate", gen.predicate, "any | solvable | unsolvable | exactly:K | at-least:K")
        ->capture_default_str();
    g->add_option("--method", gen.method, "generate-select | hill-climb | prespecified | homogeneous")
        ->capture_default_str();
    g->add_option("--count", gen.count, "Number of instances")->capture_default_str();
    g->add_option("--max-attempts", gen.max_attempts, "Candidate budget per instance")->capture_default_str();
    g->add_option("--swap-budget", gen.swap_budget, "Hill-climbing swap budget")->capture_default_str();
    g->add_option("--seed", gen.seed, "Base seed (printed when omitted)");
    g->add_option("--out", gen.out, "Output directory")->capture_default_str();

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Run a solver on instances and write per-problem costs");
    s->add_option("--in", solve.in, "Instance file or directory of .csp files")->required();
    s->add_option("--solver", solve.solver, "dynamic | chronological | both")->capture_default_str();
    s->add_option("--runs", solve.runs, "Runs per problem")->capture_default_str();
    s->add_option("--aggregate", solve.aggregate, "median | mean")->capture_default_str();
    s->add_option("--node-cap", solve.node_cap, "Node cap per run (0 = none)")->capture_default_str();
    s->add_option("--seed", solve.seed, "Base seed (printed when omitted)");
    s->add_option("--out", solve.out, "costs.csv path (default: standard output)");

    CountArgs count;
    auto* c = app.add_subcommand("count", "Print the exact solution count");
    c->add_option("--in", count.in, "Instance file")->required();
    c->add_option("--cap", count.cap, "Stop counting at this many solutions");
    c->add_option("--seed", count.seed, "Accepted for uniformity; unused");
    c->add_option("--out", count.out, "Output file (default: standard output)");

    MusArgs mus;
    auto* u = app.add_subcommand("mus", "Enumerate minimal unsolvable subproblems");
    u->add_option("--in", mus.in, "Instance file or directory of .csp files")->required();
    u->add_option("--seed", mus.seed, "Accepted for uniformity; unused");
    u->add_option("--out", mus.out, "mus.csv path (default: standard output)");

    ColorArgs color;
    auto* k = app.add_subcommand("color", "3-color random graphs with Brelaz backtracking");
    k->add_option("--nodes", color.nodes, "Nodes per graph")->capture_default_str();
    k->add_option("--gamma", color.gamma, "Connectivity 2|E|/|V|")->capture_default_str();
    k->add_option("--samples", color.samples, "Number of graphs")->capture_default_str();
    k->add_option("--node-cap", color.node_cap, "Node cap per search (0 = none)")->capture_default_str();
    k->add_option("--seed", color.seed, "Base seed (printed when omitted)");
    k->add_option("--out", color.out, "colorcosts.csv path (default: standard output)");
    k->add_option("--save-graphs", color.save_graphs, "Directory to save the graphs in");

    ExperimentArgs exp;
    auto* e = app.add_subcommand("experiment", "Run a figure preset or a JSON-configured sweep");
    e->add_option("--preset", exp.preset, "fig1 .. fig9");
    e->add_option("--config", exp.config, "JSON config file");
    e->add_option("--scale", exp.scale, "Fraction of full sample sizes (default 0.1)");
    e->add_flag("--paper-scale", exp.paper_scale, "Use full sample sizes");
    e->add_flag("--include-long", exp.include_long, "Also run series marked long-running");
    e->add_option("--seed", exp.seed, "Base seed (printed when omitted)");
    e->add_option("--node-cap", exp.node_cap, "Node cap per run");
    e->add_option("--max-attempts", exp.max_attempts, "Generation budget per problem");
    e->add_option("--wall-time-cap", exp.wall_time_cap, "Seconds per point before stopping early");
    e->add_option("--workers", exp.workers, "Worker threads (default: PHASE_LAB_WORKERS or all cores)");
    e->add_option("--out", exp.out, "Results directory")->required();

    AnalyzeArgs an;
    auto* a = app.add_subcommand("analyze", "Recompute statistics from persisted raw data");
    a->add_option("--in", an.in, "Experiment directory");
    a->add_option("--costs", an.costs, "costs.csv written by solve");
    a->add_option("--axis", an.axis, "Axis value for --costs rows")->capture_default_str();
    a->add_option("--aggregate", an.aggregate, "median | mean (for --costs)")->capture_default_str();
    a->add_option("--seed", an.seed, "Accepted for uniformity; unused");
    a->add_option("--out", an.out, "Output directory (--in) or file (--costs); default standard output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kUsage;
    }

    try {
        if (g->parsed())
            return run_generate(gen);
        if (s->parsed())
            return run_solve(solve);
        if (c->parsed())
            return run_count(count);
        if (u->parsed())
            return run_mus(mus);
        if (k->parsed())
            return run_color(color);
        if (e->parsed())
            return run_experiment_cmd(exp);
        if (a->parsed())
            return run_analyze(an);
    } catch (const IoError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kIo;
    } catch (const InputError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kUsage;
    } catch (const ExhaustionError& err) {
        std::cerr << "error: " << err.what() << " after " << err.attempts() << " attempts\n";
        return kRuntime;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kRuntime;
    }
    return kUsage;
}
