/**
 * @file obskit_main.cpp
 * @brief Command-line front end: `obskit analyze <model> [options]`.
 *
 * Exit codes:
 *   0  analysis completed (the report states how it terminated)
 *   2  usage error, including option values naming undeclared symbols
 *   3  model error: unreadable file, parse failure, or a structural
 *      requirement violation (e.g. a non-affine model under orcdf)
 *   4  every randomized rank evaluation point was degenerate
 */
#include <CLI11.hpp>

#include <obskit.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

/// Splits "name=value"; returns false when '=' is missing or a side is empty.
bool split_assignment(const std::string &spec, std::string &name, std::string &value) {
    std::size_t eq = spec.find('=');
    if (eq == std::string::npos) return false;
    auto trim = [](std::string s) {
        std::size_t b = s.find_first_not_of(" \t");
        std::size_t e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    name = trim(spec.substr(0, eq));
    value = trim(spec.substr(eq + 1));
    return !name.empty() && !value.empty();
}

bool parse_int(const std::string &text, int &out) {
    try {
        std::size_t used = 0;
        out = std::stoi(text, &used);
        return used == text.size();
    } catch (const std::exception &) {
        return false;
    }
}

std::vector<std::string> split_commas(const std::string &list) {
    std::vector<std::string> out;
    std::istringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t b = item.find_first_not_of(" \t");
        std::size_t e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"structural observability / identifiability / input-reconstructibility analysis"};
    app.require_subcommand(1);

    CLI::App *an = app.add_subcommand("analyze", "analyze one model file");

    std::string model_path;
    std::string algorithm = "fispo";
    std::string format = "text";
    std::string exclude;
    std::vector<std::string> u_bounds, w_bounds;
    int kmax = -1;
    int multiexp = 1;
    int threads = 0;
    std::uint64_t seed = obskit::RankConfig{}.seed;
    double stage_timeout = 0.0, timeout = 0.0;
    bool no_timings = false;

    an->add_option("model", model_path, "path to the model file")->required();
    an->add_option("--algorithm", algorithm, "analysis algorithm")
        ->check(CLI::IsMember({"fispo", "orcdf"}));
    an->add_option("--kmax", kmax, "maximum differentiation stage (default: twice the dimension)");
    an->add_option("--stage-timeout", stage_timeout, "soft per-stage budget in seconds")
        ->check(CLI::NonNegativeNumber);
    an->add_option("--timeout", timeout, "soft overall budget in seconds")
        ->check(CLI::NonNegativeNumber);
    an->add_option("--seed", seed, "rank-engine random seed");
    an->add_option("--multiexp", multiexp, "number of replicated experiments")
        ->check(CLI::PositiveNumber);
    an->add_option("--u-deriv-bound", u_bounds,
                   "known-input derivative bound, name=N or name=unbounded (repeatable)");
    an->add_option("--w-deriv-bound", w_bounds,
                   "unknown-input derivative bound, name=N (repeatable)");
    an->add_option("--exclude", exclude, "comma-separated symbols to skip in classification");
    an->add_option("--format", format, "report format")->check(CLI::IsMember({"text", "json"}));
    an->add_option("--threads", threads, "rank-engine worker threads (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
    an->add_flag("--no-timings", no_timings, "omit wall-clock fields for reproducible output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (model_path.empty()) {
        std::cerr << "error: model path must not be empty\n";
        return 2;
    }

    std::ifstream in(model_path);
    if (!in) {
        std::cerr << "error: cannot read model file '" << model_path << "'\n";
        return 3;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    obskit::Model model;
    try {
        model = obskit::parse_model(buf.str(), std::filesystem::path(model_path).stem().string());
    } catch (const obskit::ModelError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    for (const std::string &spec : u_bounds) {
        std::string name, value;
        if (!split_assignment(spec, name, value)) {
            std::cerr << "error: --u-deriv-bound expects name=N or name=unbounded, got '" << spec
                      << "'\n";
            return 2;
        }
        obskit::Symbol s = nullptr;
        for (obskit::Symbol k : model.known_inputs)
            if (k->name == name) s = k;
        if (!s) {
            std::cerr << "error: --u-deriv-bound: '" << name << "' is not a known input\n";
            return 2;
        }
        int bound = -1;
        if (value != "unbounded" && (!parse_int(value, bound) || bound < 0)) {
            std::cerr << "error: --u-deriv-bound." << name
                      << " must be a nonnegative integer or 'unbounded'\n";
            return 2;
        }
        model.u_deriv_bound[s] = bound;
    }

    for (const std::string &spec : w_bounds) {
        std::string name, value;
        int bound = 0;
        if (!split_assignment(spec, name, value) || !parse_int(value, bound) || bound < 0) {
            std::cerr << "error: --w-deriv-bound expects name=N with N >= 0, got '" << spec << "'\n";
            return 2;
        }
        obskit::Symbol s = nullptr;
        for (obskit::Symbol w : model.unknown_inputs)
            if (w->name == name) s = w;
        if (!s) {
            std::cerr << "error: --w-deriv-bound: '" << name << "' is not an unknown input\n";
            return 2;
        }
        model.w_deriv_bound[s] = bound;
    }

    for (const std::string &name : split_commas(exclude)) {
        obskit::Symbol s = obskit::find_model_symbol(model, name);
        if (!s || s->kind == obskit::SymbolKind::KnownInputDeriv) {
            std::cerr << "error: --exclude: '" << name << "' is not a state, parameter, or "
                      << "unknown input of the model\n";
            return 2;
        }
        model.excluded.insert(s);
    }

    obskit::AnalysisOptions opts;
    opts.algorithm = algorithm == "orcdf" ? obskit::Algorithm::OrcDf : obskit::Algorithm::Fispo;
    opts.kmax = kmax;
    opts.stage_time_budget = stage_timeout;
    opts.total_time_budget = timeout;
    opts.multiexp = multiexp;
    opts.rank.seed = seed;
    opts.rank.threads = threads;

    obskit::Report report;
    try {
        report = obskit::analyze(model, opts);
    } catch (const obskit::DegenerateEvaluation &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const obskit::ModelError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    obskit::emit_report(report, std::cout,
                        format == "json" ? obskit::ReportFormat::Json : obskit::ReportFormat::Text,
                        !no_timings);
    return 0;
}
