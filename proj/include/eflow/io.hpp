#pragma once
// CSV/JSON/SVG emitters and the few readers the CLI needs. Numbers are
// written with 17 significant digits so reruns are byte-identical.

#include <string>
#include <vector>

#include <json.hpp>

#include "eflow/barrier.hpp"
#include "eflow/curve.hpp"
#include "eflow/elastica.hpp"
#include "eflow/experiments.hpp"
#include "eflow/flow.hpp"

namespace eflow {

std::string format_number(double v);

// `index,x,y`
void write_curve_csv(const std::string &path, const DiscreteCurve &curve);
DiscreteCurve read_curve_csv(const std::string &path);

// `L,B,E,TC,yMin,yMax`, one row.
void write_report_csv(const std::string &path, const GeometricReport &rep);

// `ell,class,E,TC,L,B,theta0,a`, one row per solution.
void write_catalogue_csv(const std::string &path, double ell, const std::vector<const ElasticaSolution *> &rows);

// `{rStar, eStar}`
void write_figure_eight_json(const std::string &path, const FigureEightData &fig);

// `ell,r,m,converged`
void write_barrier_csv(const std::string &path, const BarrierMap &map);
// `{mStar, c1, ellAdmissible}`
void write_constants_json(const std::string &path, const BarrierMap &map);

// `t,E,TC,yMin,yMax,location`
void write_timeseries_csv(const std::string &path, const std::vector<FlowSample> &ts);

struct SvgLayer {
    DiscreteCurve curve;
    std::string color = "#1f77b4";
    double opacity = 1.0;
};

// Fixed 800x500 viewBox fitted to all layers; the line y = 0 is drawn dashed.
std::string render_svg(const std::vector<SvgLayer> &layers, const std::string &title);
void write_text(const std::string &path, const std::string &text);

// FlowConfig / ScenarioConfig as JSON objects; missing keys keep defaults.
nlohmann::json to_json(const FlowConfig &c);
FlowConfig flow_config_from_json(const nlohmann::json &j);
nlohmann::json to_json(const ScenarioConfig &c);
ScenarioConfig scenario_from_json(const nlohmann::json &j);
nlohmann::json read_json(const std::string &path);

nlohmann::json to_json(const BarrierRefs &r);
BarrierRefs barrier_refs_from_json(const nlohmann::json &j);

nlohmann::json summary_json(const ExperimentReport &report);

} // namespace eflow
