#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "eflow/io.hpp"
#include "support.hpp"

using namespace eflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path &p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "eflow_io_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string &f) const { return (path / f).string(); }
};

} // namespace

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 12345.678}) CHECK(std::stod(format_number(v)) == v);
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("curve CSV") {
    TempDir tmp;
    const DiscreteCurve c = testing_support::semicircle(40);
    write_curve_csv(tmp / "c.csv", c);
    CHECK(first_line(tmp / "c.csv") == "index,x,y");
    const DiscreteCurve back = read_curve_csv(tmp / "c.csv");
    CHECK(max_displacement(c, back) == 0.0);

    std::ofstream(tmp / "bad.csv") << "i,x,y\n0,0,0\n";
    CHECK_THROWS_AS(read_curve_csv(tmp / "bad.csv"), IoError);
    std::ofstream(tmp / "bad2.csv") << "index,x,y\n0,zero,0\n";
    CHECK_THROWS_AS(read_curve_csv(tmp / "bad2.csv"), IoError);
    CHECK_THROWS_AS(read_curve_csv(tmp / "missing.csv"), IoError);
}

TEST_CASE("table headers") {
    TempDir tmp;
    write_report_csv(tmp / "r.csv", report(testing_support::semicircle(32)));
    CHECK(first_line(tmp / "r.csv") == "L,B,E,TC,yMin,yMax");

    std::vector<FlowSample> ts(2);
    ts[1].t = 0.5;
    ts[1].location = Location::StrictLower;
    write_timeseries_csv(tmp / "t.csv", ts);
    CHECK(first_line(tmp / "t.csv") == "t,E,TC,yMin,yMax,location");
    CHECK(slurp(tmp / "t.csv").find(to_string(Location::StrictLower)) != std::string::npos);

    BarrierMap map;
    map.cells = {{0.0, 1.0, 2.0, true}, {0.1, 1.0, 1.5, false}};
    map.mStar = 3.5;
    map.c1 = 0.2;
    map.ellAdmissible = 0.3;
    write_barrier_csv(tmp / "b.csv", map);
    CHECK(slurp(tmp / "b.csv") == "ell,r,m,converged\n0,1,2,1\n0.10000000000000001,1,1.5,0\n");
    write_constants_json(tmp / "k.json", map);
    const auto k = read_json(tmp / "k.json");
    CHECK(k.at("mStar") == 3.5);
    CHECK(k.at("c1") == 0.2);
    CHECK(k.at("ellAdmissible") == 0.3);
    CHECK(k.size() == 3);
}

TEST_CASE("catalogue and figure-eight files") {
    TempDir tmp;
    const Catalogue cat = enumerate_low_energy(0.3);
    write_catalogue_csv(tmp / "cat.csv", 0.3, cat.members());
    CHECK(first_line(tmp / "cat.csv") == "ell,class,E,TC,L,B,theta0,a");
    FigureEightData fig;
    fig.rStar = 1.25;
    fig.eStar = 2.5;
    write_figure_eight_json(tmp / "f.json", fig);
    const auto j = read_json(tmp / "f.json");
    CHECK(j.at("rStar") == 1.25);
    CHECK(j.at("eStar") == 2.5);
}

TEST_CASE("svg") {
    const std::string svg = render_svg({{testing_support::semicircle(16)}}, "t");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("viewBox=\"0 0 800 500\"") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") != std::string::npos); // the x-axis
    CHECK(svg.find("<polyline") != std::string::npos);
}

TEST_CASE("config JSON") {
    ScenarioConfig c;
    c.ell = 0.2;
    c.mode = PerturbMode::UpwardBump;
    c.flow.N = 128;
    c.flow.tau = 1e-3;
    const ScenarioConfig back = scenario_from_json(to_json(c));
    CHECK(back.ell == 0.2);
    CHECK(back.mode == PerturbMode::UpwardBump);
    CHECK(back.flow.N == 128);
    CHECK(back.flow.tau == 1e-3);

    const ScenarioConfig partial = scenario_from_json(nlohmann::json{{"ell", 0.05}});
    CHECK(partial.ell == 0.05);
    CHECK(partial.flow.N == FlowConfig{}.N);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"ell", "wide"}}), InvalidArgument);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"perturbMode", "sideways"}}), InvalidArgument);
    CHECK_THROWS_AS(barrier_refs_from_json(nlohmann::json{{"c1", 0.1}}), InvalidArgument);
}

TEST_CASE("unwritable destination") {
    TempDir tmp;
    std::ofstream(tmp / "file") << "x";
    CHECK_THROWS_AS(write_text(tmp / "file/sub/out.txt", "y"), IoError);
}
