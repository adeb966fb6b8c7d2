// Command-line front end. Every subcommand writes under $EFLOW_OUTPUT_ROOT
// (default ./out) and prints a short JSON summary to stdout.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "eflow/barrier.hpp"
#include "eflow/elastica.hpp"
#include "eflow/experiments.hpp"
#include "eflow/flow.hpp"
#include "eflow/io.hpp"

using namespace eflow;
using nlohmann::json;

namespace {

std::string output_root() {
    const char *env = std::getenv("EFLOW_OUTPUT_ROOT");
    return env && *env ? std::string(env) : std::string("out");
}

std::string out_dir(const std::string &sub) {
    const std::string dir = output_root() + "/" + sub;
    std::filesystem::create_directories(dir);
    return dir;
}

std::string tag(double ell) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ell_%.6g", ell);
    return buf;
}

// Shorter arcs come in a mirror pair with the same class tag.
std::string file_stem(const ElasticaSolution &s) {
    std::string name = to_string(s.classTag);
    if (s.classTag == ElasticaClass::ShorterArc) name += s.report.TC > 0.0 ? "+" : "-";
    return name;
}

void print(const json &j) { std::cout << j.dump(2) << "\n"; }

json solution_json(const ElasticaSolution &s) {
    return {{"class", to_string(s.classTag)}, {"E", s.energy},           {"TC", s.report.TC},
            {"L", s.shooting.length},         {"theta0", s.shooting.theta0}, {"a", s.shooting.a},
            {"residual", s.residual}};
}

void write_solution(const std::string &dir, const ElasticaSolution &s) {
    const std::string base = dir + "/" + file_stem(s);
    write_curve_csv(base + ".csv", s.curve);
    write_report_csv(base + "_report.csv", s.report);
}

// Constants for migrate/sweep: a constants file when given, else the one left
// by `barrier map` under the output root, else a short computation.
BarrierRefs load_refs(const std::string &path, const FigureEightData &fig) {
    std::string file = path;
    if (file.empty() && std::filesystem::exists(output_root() + "/barrier/constants.json"))
        file = output_root() + "/barrier/constants.json";
    if (!file.empty()) {
        json j = read_json(file);
        j["rStar"] = fig.rStar;
        j["eStar"] = fig.eStar;
        BarrierRefs r = barrier_refs_from_json(j);
        if (!j.contains("c2")) r.c2 = r.c1;
        return r;
    }
    std::cerr << "no constants file; estimating barrier constants on a coarse grid\n";
    BarrierRefs r = barrier_refs(fig, {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35});
    return r;
}

void cmd_solve(double ell, const std::string &family) {
    const Catalogue cat = enumerate_low_energy(ell);
    const std::string dir = out_dir("elastica/" + tag(ell));
    std::vector<const ElasticaSolution *> picked;
    if (family == "seg") picked = {&cat.segment};
    else if (family == "arc") picked = {&cat.arcPlus, &cat.arcMinus};
    else picked = {&cat.loopPlus, &cat.loopMinus};
    json out = json::array();
    for (const ElasticaSolution *s : picked) {
        write_solution(dir, *s);
        out.push_back(solution_json(*s));
    }
    print({{"ell", ell}, {"family", family}, {"solutions", out}, {"dir", dir}});
}

void cmd_atlas(double ell) {
    const Catalogue cat = enumerate_low_energy(ell);
    const std::string dir = out_dir("elastica/" + tag(ell));
    const auto members = cat.members();
    write_catalogue_csv(dir + "/catalogue.csv", ell, members);
    std::vector<SvgLayer> layers;
    json out = json::array();
    const char *colors[] = {"#000000", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    int c = 0;
    for (const ElasticaSolution *s : members) {
        write_solution(dir, *s);
        layers.push_back({s->curve, colors[c++ % 7], 1.0});
        out.push_back(solution_json(*s));
    }
    write_text(dir + "/atlas.svg", render_svg(layers, "ell = " + format_number(ell)));
    print({{"ell", ell}, {"solutions", out}, {"dir", dir}});
}

void cmd_figure_eight() {
    const FigureEightData fig = figure_eight();
    const std::string dir = out_dir("figure_eight");
    write_figure_eight_json(dir + "/figure_eight.json", fig);
    write_curve_csv(dir + "/figure_eight.csv", fig.curve);
    write_text(dir + "/figure_eight.svg", render_svg({{fig.curve}}, "half-fold figure-eight"));
    print({{"rStar", fig.rStar}, {"eStar", fig.eStar}, {"dir", dir}});
}

void cmd_barrier(double ellMax, int res, int rRes, int intervals) {
    const FigureEightData fig = figure_eight();
    const BarrierGrid grid = make_grid(ellMax, res, -fig.rStar, 2.0 * fig.rStar, rRes, fig.rStar, intervals);
    BarrierMap map = barrier_constants(grid, fig);
    admissible_ell_bound(map);
    const std::string dir = out_dir("barrier");
    write_barrier_csv(dir + "/barrier.csv", map);
    write_constants_json(dir + "/constants.json", map);
    print({{"mStar", map.mStar},
           {"c1", map.c1},
           {"ellAdmissible", map.ellAdmissible},
           {"barrierVerified", map.barrierVerified},
           {"minimalityVerified", map.minimalityVerified},
           {"dir", dir}});
}

std::optional<ElasticaClass> class_name(const std::string &s) {
    try {
        return elastica_class_from_string(s);
    } catch (const Error &) {
        return std::nullopt;
    }
}

// A config with an "initial" key (curve CSV path or catalogue class name) runs
// the bare flow; otherwise the full scenario is run.
void cmd_flow(const std::string &configPath, const std::string &constants) {
    const json j = read_json(configPath);
    ScenarioConfig cfg = scenario_from_json(j);
    if (cfg.outputDir.empty()) cfg.outputDir = output_root() + "/flow";
    if (!j.contains("initial")) {
        const FigureEightData fig = figure_eight();
        const ExperimentReport rep = run_theorem_experiment(cfg, load_refs(constants, fig));
        render_report(rep);
        print(summary_json(rep));
        return;
    }
    cfg.validate();
    const std::string init = j.at("initial").get<std::string>();
    const Catalogue cat = enumerate_low_energy(std::sqrt(cfg.lambda) * cfg.ell);
    DiscreteCurve start;
    if (auto c = class_name(init)) {
        const ElasticaSolution *pick = nullptr;
        for (const ElasticaSolution *s : cat.members())
            if (s->classTag == *c) pick = s;
        if (!pick) throw InvalidArgument("no catalogue member " + init + " at this ell");
        start = rescale(pick->curve, 1.0 / std::sqrt(cfg.lambda));
    } else {
        start = read_curve_csv(init);
    }
    FlowConfig flow = cfg.flow;
    flow.lambda = cfg.lambda;
    ExperimentReport rep;
    rep.config = cfg;
    try {
        rep.flow = run(start, flow, cfg.lambda == 1.0 ? &cat : nullptr);
    } catch (const FlowAborted &e) {
        rep.flow = e.partial;
        rep.notes.push_back(std::string("flow: ") + e.what());
    }
    render_report(rep);
    print(summary_json(rep)["flow"]);
}

void cmd_migrate(double ell, double eps, const std::string &mode, std::uint64_t seed, double lambda, int N,
                 const std::string &constants) {
    ScenarioConfig cfg;
    cfg.ell = ell;
    cfg.eps = eps;
    cfg.mode = perturb_mode_from_string(mode);
    cfg.rngSeed = seed;
    cfg.lambda = lambda;
    cfg.flow.N = N;
    cfg.outputDir = out_dir("migrate/" + tag(ell) + "_" + mode);
    const FigureEightData fig = figure_eight();
    const ExperimentReport rep = run_theorem_experiment(cfg, load_refs(constants, fig));
    render_report(rep);
    print(summary_json(rep));
}

void cmd_sweep(double lo, double hi, int steps, const std::string &constants) {
    if (steps < 1 || !(hi >= lo) || !(lo > 0.0)) throw InvalidArgument("sweep: need 0 < ell-min <= ell-max, steps >= 1");
    std::vector<double> ells;
    for (int i = 0; i < steps; ++i) ells.push_back(steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1));
    ScenarioConfig templ;
    templ.outputDir = out_dir("sweep");
    const FigureEightData fig = figure_eight();
    const SweepResult res = sweep_ell(ells, templ, load_refs(constants, fig));
    json rows = json::array();
    for (const auto &r : res.rows) {
        rows.push_back({{"ell", r.ell},
                        {"verdict", to_string(r.verdict)},
                        {"limitClass", r.limitClass ? to_string(*r.limitClass) : "unresolved"},
                        {"t0Est", r.t0Est ? json(*r.t0Est) : json(nullptr)},
                        {"t1Est", r.t1Est ? json(*r.t1Est) : json(nullptr)},
                        {"note", r.note}});
    }
    const json out{{"rows", rows}, {"largestMigrating", res.largestMigrating}, {"admissibleBound", res.admissibleBound}};
    write_text(templ.outputDir + "/sweep.json", out.dump(2) + "\n");
    print(out);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Elastic flow of pinned open curves: elasticae, energy barrier, migration runs"};
    app.require_subcommand(1);

    auto *el = app.add_subcommand("elastica", "pinned elastica solutions");
    el->require_subcommand(1);
    double ell = 0.3;
    std::string family = "arc";
    auto *solve = el->add_subcommand("solve", "solve one family at ell");
    solve->add_option("--ell", ell, "endpoint distance")->required()->check(CLI::PositiveNumber);
    solve->add_option("--family", family)->check(CLI::IsMember({"seg", "arc", "loop"}));
    auto *atlas = el->add_subcommand("atlas", "low-energy catalogue at ell");
    atlas->add_option("--ell", ell)->required()->check(CLI::PositiveNumber);

    auto *fig8 = app.add_subcommand("figure-eight", "half-fold figure-eight constants");

    auto *bar = app.add_subcommand("barrier", "constrained minimum map");
    bar->require_subcommand(1);
    double ellMax = 0.5;
    int res = 10, rRes = 10, intervals = 512;
    auto *map = bar->add_subcommand("map", "fill m(ell, r) and derive the barrier constants");
    map->add_option("--ell-max", ellMax)->check(CLI::NonNegativeNumber);
    map->add_option("--res", res, "ell grid points")->check(CLI::PositiveNumber);
    map->add_option("--r-res", rRes, "r grid points")->check(CLI::PositiveNumber);
    map->add_option("--intervals", intervals, "angle samples per curve")->check(CLI::Range(16, 8192));

    auto *fl = app.add_subcommand("flow", "flow runs");
    fl->require_subcommand(1);
    std::string config, constants;
    auto *flowRun = fl->add_subcommand("run", "run the flow from a JSON config");
    flowRun->add_option("--config", config)->required()->check(CLI::ExistingFile);
    flowRun->add_option("--constants", constants)->check(CLI::ExistingFile);

    double eps = 0.05, lambda = 1.0;
    std::string mode = "hessian";
    std::uint64_t seed = 1;
    int N = 256;
    auto *mig = app.add_subcommand("migrate", "prepared datum from the upper loop, then flow");
    mig->add_option("--ell", ell)->required()->check(CLI::PositiveNumber);
    mig->add_option("--eps", eps)->check(CLI::PositiveNumber);
    mig->add_option("--mode", mode)->check(CLI::IsMember({"hessian", "bump", "bump-up"}));
    mig->add_option("--seed", seed);
    mig->add_option("--lambda", lambda)->check(CLI::PositiveNumber);
    mig->add_option("--N", N, "edges")->check(CLI::Range(64, 8192));
    mig->add_option("--constants", constants)->check(CLI::ExistingFile);

    double lo = 0.05, hi = 0.4;
    int steps = 8;
    auto *sw = app.add_subcommand("sweep", "migration runs over an ell grid");
    sw->add_option("--ell-min", lo)->required();
    sw->add_option("--ell-max", hi)->required();
    sw->add_option("--steps", steps)->required();
    sw->add_option("--constants", constants)->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) cmd_solve(ell, family);
        else if (atlas->parsed()) cmd_atlas(ell);
        else if (fig8->parsed()) cmd_figure_eight();
        else if (map->parsed()) cmd_barrier(ellMax, res, rRes, intervals);
        else if (flowRun->parsed()) cmd_flow(config, constants);
        else if (mig->parsed()) cmd_migrate(ell, eps, mode, seed, lambda, N, constants);
        else if (sw->parsed()) cmd_sweep(lo, hi, steps, constants);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
