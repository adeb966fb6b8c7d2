#include "eflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace eflow {

using nlohmann::json;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string &path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + p.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

void finish(std::ofstream &out, const std::string &path) {
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

std::string row(std::initializer_list<std::string> cells) {
    std::string s;
    for (const auto &c : cells) {
        if (!s.empty()) s += ',';
        s += c;
    }
    return s + '\n';
}

// nlohmann prints doubles with the shortest round-trip form, which is
// deterministic; NaN becomes null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

} // namespace

void write_text(const std::string &path, const std::string &text) {
    auto out = open_out(path);
    out << text;
    finish(out, path);
}

void write_curve_csv(const std::string &path, const DiscreteCurve &curve) {
    auto out = open_out(path);
    out << "index,x,y\n";
    for (int i = 0; i < curve.size(); ++i)
        out << row({std::to_string(i), format_number(curve[i].x()), format_number(curve[i].y())});
    finish(out, path);
}

DiscreteCurve read_curve_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("index,x,y", 0) != 0) throw IoError(path + ": expected header index,x,y");
    PointList pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw IoError(path + ": malformed row: " + line);
        try {
            pts.emplace_back(std::stod(b), std::stod(c));
        } catch (const std::exception &) {
            throw IoError(path + ": malformed number in row: " + line);
        }
    }
    return DiscreteCurve(std::move(pts));
}

void write_report_csv(const std::string &path, const GeometricReport &r) {
    auto out = open_out(path);
    out << "L,B,E,TC,yMin,yMax\n";
    out << row({format_number(r.L), format_number(r.B), format_number(r.E), format_number(r.TC),
                format_number(r.yMin), format_number(r.yMax)});
    finish(out, path);
}

void write_catalogue_csv(const std::string &path, double ell, const std::vector<const ElasticaSolution *> &rows) {
    auto out = open_out(path);
    out << "ell,class,E,TC,L,B,theta0,a\n";
    for (const ElasticaSolution *s : rows)
        out << row({format_number(ell), to_string(s->classTag), format_number(s->energy), format_number(s->report.TC),
                    format_number(s->shooting.length), format_number(s->energy - s->shooting.length),
                    format_number(s->shooting.theta0), format_number(s->shooting.a)});
    finish(out, path);
}

void write_figure_eight_json(const std::string &path, const FigureEightData &fig) {
    write_text(path, json{{"rStar", fig.rStar}, {"eStar", fig.eStar}}.dump(2) + "\n");
}

void write_barrier_csv(const std::string &path, const BarrierMap &map) {
    auto out = open_out(path);
    out << "ell,r,m,converged\n";
    for (const auto &c : map.cells)
        out << row({format_number(c.ell), format_number(c.r), format_number(c.m), c.converged ? "1" : "0"});
    finish(out, path);
}

void write_constants_json(const std::string &path, const BarrierMap &map) {
    write_text(path, json{{"mStar", num(map.mStar)}, {"c1", num(map.c1)}, {"ellAdmissible", num(map.ellAdmissible)}}
                             .dump(2) + "\n");
}

void write_timeseries_csv(const std::string &path, const std::vector<FlowSample> &ts) {
    auto out = open_out(path);
    out << "t,E,TC,yMin,yMax,location\n";
    for (const auto &s : ts)
        out << row({format_number(s.t), format_number(s.E), format_number(s.TC), format_number(s.yMin),
                    format_number(s.yMax), to_string(s.location)});
    finish(out, path);
}

std::string render_svg(const std::vector<SvgLayer> &layers, const std::string &title) {
    constexpr double W = 800, H = 500, pad = 30;
    double x0 = 0, x1 = 1, y0 = -0.5, y1 = 0.5;
    bool first = true;
    for (const auto &l : layers)
        for (const auto &p : l.curve.points()) {
            if (first) {
                x0 = x1 = p.x();
                y0 = y1 = p.y();
                first = false;
            }
            x0 = std::min(x0, p.x());
            x1 = std::max(x1, p.x());
            y0 = std::min(y0, p.y());
            y1 = std::max(y1, p.y());
        }
    y0 = std::min(y0, 0.0);
    y1 = std::max(y1, 0.0);
    const double span = std::max({x1 - x0, y1 - y0, 1e-9});
    const double scale = std::min((W - 2 * pad) / std::max(x1 - x0, span * 1e-3), (H - 2 * pad) / std::max(y1 - y0, span * 1e-3));
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    auto X = [&](double x) { return W / 2 + scale * (x - cx); };
    auto Y = [&](double y) { return H / 2 - scale * (y - cy); };

    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(3);
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << int(W) << ' ' << int(H) << "\" width=\"" << int(W)
      << "\" height=\"" << int(H) << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<title>" << title << "</title>\n";
    s << "<line x1=\"0\" y1=\"" << Y(0.0) << "\" x2=\"" << W << "\" y2=\"" << Y(0.0)
      << "\" stroke=\"#888\" stroke-dasharray=\"6 4\" stroke-width=\"1\"/>\n";
    for (const auto &l : layers) {
        s << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-opacity=\"" << l.opacity
          << "\" stroke-width=\"1.5\" points=\"";
        for (const auto &p : l.curve.points()) s << X(p.x()) << ',' << Y(p.y()) << ' ';
        s << "\"/>\n";
    }
    for (const auto &l : layers) {
        if (l.curve.size() == 0) continue;
        for (const Vec2 &e : {l.curve.front(), l.curve.back()})
            s << "<circle cx=\"" << X(e.x()) << "\" cy=\"" << Y(e.y()) << "\" r=\"3\" fill=\"black\"/>\n";
        break;
    }
    s << "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

json to_json(const FlowConfig &c) {
    return json{{"tau", c.tau},           {"tauMax", c.tauMax},         {"tauGrowth", c.tauGrowth},
                {"adaptive", c.adaptive}, {"N", c.N},                   {"tMax", c.tMax},
                {"maxSteps", c.maxSteps}, {"gradTol", c.gradTol},       {"remeshEvery", c.remeshEvery},
                {"remeshRatio", c.remeshRatio}, {"innerTol", c.innerTol}, {"innerMaxIter", c.innerMaxIter},
                {"lambda", c.lambda},     {"snapshotEvery", c.snapshotEvery}, {"classify", c.classify}};
}

FlowConfig flow_config_from_json(const json &j) {
    FlowConfig c;
    try {
        c.tau = j.value("tau", c.tau);
        c.tauMax = j.value("tauMax", std::max(c.tauMax, c.tau));
        c.tauGrowth = j.value("tauGrowth", c.tauGrowth);
        c.adaptive = j.value("adaptive", c.adaptive);
        c.N = j.value("N", c.N);
        c.tMax = j.value("tMax", c.tMax);
        c.maxSteps = j.value("maxSteps", c.maxSteps);
        c.gradTol = j.value("gradTol", c.gradTol);
        c.remeshEvery = j.value("remeshEvery", c.remeshEvery);
        c.remeshRatio = j.value("remeshRatio", c.remeshRatio);
        c.innerTol = j.value("innerTol", c.innerTol);
        c.innerMaxIter = j.value("innerMaxIter", c.innerMaxIter);
        c.lambda = j.value("lambda", c.lambda);
        c.snapshotEvery = j.value("snapshotEvery", c.snapshotEvery);
        c.classify = j.value("classify", c.classify);
    } catch (const json::exception &e) {
        throw InvalidArgument(std::string("flow config: ") + e.what());
    }
    return c;
}

json to_json(const ScenarioConfig &c) {
    return json{{"ell", c.ell},   {"lambda", c.lambda},   {"eps", c.eps},
                {"perturbMode", to_string(c.mode)}, {"flow", to_json(c.flow)}, {"rngSeed", c.rngSeed},
                {"outputDir", c.outputDir}};
}

ScenarioConfig scenario_from_json(const json &j) {
    ScenarioConfig c;
    try {
        c.ell = j.value("ell", c.ell);
        c.lambda = j.value("lambda", c.lambda);
        c.eps = j.value("eps", c.eps);
        c.mode = perturb_mode_from_string(j.value("perturbMode", to_string(c.mode)));
        if (j.contains("flow")) c.flow = flow_config_from_json(j.at("flow"));
        c.rngSeed = j.value("rngSeed", c.rngSeed);
        c.outputDir = j.value("outputDir", c.outputDir);
    } catch (const json::exception &e) {
        throw InvalidArgument(std::string("scenario config: ") + e.what());
    }
    return c;
}

json read_json(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw IoError(path + ": " + e.what());
    }
}

json to_json(const BarrierRefs &r) {
    return json{{"rStar", r.rStar}, {"eStar", r.eStar}, {"mStar", r.mStar},
                {"c1", r.c1},       {"c2", r.c2},       {"ellAdmissible", r.ellAdmissible}};
}

BarrierRefs barrier_refs_from_json(const json &j) {
    BarrierRefs r;
    try {
        r.rStar = j.at("rStar").get<double>();
        r.eStar = j.at("eStar").get<double>();
        r.mStar = j.at("mStar").get<double>();
        r.c1 = j.value("c1", 0.0);
        r.c2 = j.value("c2", 0.0);
        r.ellAdmissible = j.value("ellAdmissible", 0.0);
    } catch (const json::exception &e) {
        throw InvalidArgument(std::string("barrier constants: ") + e.what());
    }
    return r;
}

json summary_json(const ExperimentReport &rep) {
    json checks{{"energyBelowLoop", rep.datum.checks.energyBelowLoop},
                {"tcWithinQuarterRStar", rep.datum.checks.tcWithinQuarterRStar},
                {"strictlyUpper", rep.datum.checks.strictlyUpper},
                {"endCurvatureResidual", rep.datum.checks.endCurvatureResidual},
                {"endCurvatureZero", rep.datum.checks.endCurvatureZero}};
    json j{{"config", to_json(rep.config)},
           {"prepared", rep.prepared},
           {"initialChecks", checks},
           {"datum", {{"eps", rep.datum.eps}, {"halvings", rep.datum.halvings}, {"energy", num(rep.datum.energy)},
                      {"tc", num(rep.datum.tc)}, {"loopEnergy", num(rep.datum.loopEnergy)},
                      {"loopTC", num(rep.datum.loopTC)}, {"eigenvalue", num(rep.datum.eigenvalue)}}},
           {"initialEnergyBelowBarrier", rep.initialEnergyOk},
           {"initialTCAboveHalfRStar", rep.initialTCOk},
           {"ellWithinAdmissible", rep.ellWithinAdmissible},
           {"barrierRefs", to_json(rep.refs)},
           {"estimates", {{"c1", rep.refs.c1}, {"c2", rep.refs.c2}, {"usableEll", rep.usableEll}}},
           {"verdict", to_string(rep.verdict)},
           {"barrierAnomaly", rep.barrierAnomaly},
           {"notes", rep.notes}};
    if (rep.flow) {
        const FlowResult &f = *rep.flow;
        j["flow"] = {{"steps", f.steps},
                     {"rejectedSteps", f.rejectedSteps},
                     {"stop", to_string(f.stop)},
                     {"finalTime", f.final.t},
                     {"finalEnergy", f.final.report.E},
                     {"finalTC", f.final.report.TC},
                     {"limitClass", f.limitClass ? to_string(*f.limitClass) : std::string("unresolved")},
                     {"limitDistance", num(f.limitDistance)},
                     {"t0Est", f.t0Est ? json(*f.t0Est) : json(nullptr)},
                     {"t1Est", f.t1Est ? json(*f.t1Est) : json(nullptr)},
                     {"maxEnergyIncrease", f.maxEnergyIncrease},
                     {"remeshes", f.remeshes.size()},
                     {"deferredRemeshes", f.deferredRemeshes}};
        json rm = json::array();
        for (const auto &e : f.remeshes)
            rm.push_back({{"step", e.step}, {"t", e.t}, {"energyBefore", e.energyBefore}, {"energyAfter", e.energyAfter}});
        j["flow"]["remeshLog"] = rm;
    }
    return j;
}

std::vector<std::string> render_report(const ExperimentReport &rep) {
    if (rep.config.outputDir.empty()) throw InvalidArgument("render_report: no output directory");
    const std::string dir = rep.config.outputDir;
    std::vector<std::string> written;
    const std::string summary = dir + "/summary.json";
    write_text(summary, summary_json(rep).dump(2) + "\n");
    written.push_back(summary);
    if (!rep.flow || rep.flow->timeseries.empty()) return written;

    const FlowResult &f = *rep.flow;
    const std::string ts = dir + "/timeseries.csv";
    write_timeseries_csv(ts, f.timeseries);
    written.push_back(ts);

    auto nearest = [&](double t) -> const Snapshot & {
        const Snapshot *best = &f.snapshots.front();
        for (const auto &s : f.snapshots)
            if (std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
        return *best;
    };
    std::vector<std::pair<std::string, const Snapshot *>> frames{{"initial", &f.snapshots.front()}};
    frames.push_back({"near_t0", &nearest(f.t0Est.value_or(f.snapshots.front().t))});
    frames.push_back({"near_t1", &nearest(f.t1Est.value_or(f.snapshots.back().t))});
    frames.push_back({"final", &f.snapshots.back()});
    for (const auto &[name, snap] : frames) {
        const std::string path = dir + "/" + name + ".svg";
        write_text(path, render_svg({{snap->curve}}, name + "  t = " + format_number(snap->t)));
        written.push_back(path);
        const std::string csv = dir + "/" + name + ".csv";
        write_curve_csv(csv, snap->curve);
        written.push_back(csv);
    }
    // All snapshots overlaid with an opacity ramp.
    std::vector<SvgLayer> layers;
    const std::size_t n = f.snapshots.size();
    for (std::size_t i = 0; i < n; ++i)
        layers.push_back({f.snapshots[i].curve, "#1f77b4", 0.15 + 0.85 * static_cast<double>(i + 1) / n});
    const std::string overlay = dir + "/overlay.svg";
    write_text(overlay, render_svg(layers, "snapshots"));
    written.push_back(overlay);
    return written;
}

} // namespace eflow
