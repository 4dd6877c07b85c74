#include "support.hpp"

#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <fstream>

using namespace degradiag;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& s)
{
    std::ofstream(p) << s;
}

MeasurementFileSpec relaxed(std::size_t min_rows)
{
    MeasurementFileSpec s;
    s.min_rows = min_rows;
    return s;
}

std::size_t count_polylines(const boost::property_tree::ptree& node)
{
    std::size_t n = 0;
    for (const auto& [name, child] : node) {
        if (name == "polyline" && child.get<std::string>("<xmlattr>.class", "") == "series")
            ++n;
        n += count_polylines(child);
    }
    return n;
}

DegradationReport sample_report()
{
    const auto& bol = support::reference_cell();
    DegradationReport r;
    r.flags.lli = true;
    r.flags.lam_pe = true;
    r.flags.evidence["lli"] = "valley shift +18.75 mV";
    r.flags.evidence["lam_pe"] = "residual +7.10 mV";
    r.estimated = {26500.0, 0.582, 0.5234};
    r.deltas = degradation_deltas(bol, support::aged_cell(26500.0, 0.582, 0.5234));
    r.fit_rms = 0.00123456789;
    r.valley_residual = -0.0004;
    r.capacity_measured = 46.3;
    r.capacity_simulated = 46.31;
    r.refinement_passes = 2;
    r.search_trace.c_n0 = StageTrace{{{26000.0, 0.01}, {26500.0, 0.0001}}, {{25000.0, "no valley"}}};
    r.search_trace.eps_p = StageTrace{{{0.52, 0.002}}, {}};
    for (auto& d : r.deltas) {
        d.bol_value = round_export(d.bol_value);
        d.aged_value = round_export(d.aged_value);
        d.relative_change = round_export(d.relative_change);
    }
    return r;
}

} // namespace

TEST_SUITE("dataio")
{
    TEST_CASE("constant current is integrated with the trapezoid rule")
    {
        const auto dir = support::scratch_dir("trapezoid");
        write_text(dir / "cc.csv", "time_s,current_a,voltage_v\n0,1,4.0\n1,1,3.9\n2,1,3.8\n");
        const auto t = load_voltage_csv(dir / "cc.csv", relaxed(3));
        REQUIRE(t.samples.size() == 3);
        CHECK(t.capacity() == doctest::Approx(2.0 / 3600.0).epsilon(1e-14));
        CHECK(t.provenance == Provenance::measured);
        // negative-signed discharge current integrates to the same throughput
        write_text(dir / "neg.csv", "time_s,current_a,voltage_v\n0,-1,4.0\n1,-1,3.9\n2,-1,3.8\n");
        CHECK(load_voltage_csv(dir / "neg.csv", relaxed(3)).capacity() == doctest::Approx(2.0 / 3600.0));
    }

    TEST_CASE("loader errors name the line or the rule")
    {
        const auto dir = support::scratch_dir("loader_errors");
        write_text(dir / "dup.csv", "time_s,current_a,voltage_v\n0,1,4.0\n1,1,3.9\n1,1,3.8\n2,1,3.7\n");
        CHECK_THROWS_WITH_AS(load_voltage_csv(dir / "dup.csv", relaxed(3)), doctest::Contains(":4: duplicated timestamp"), Error);

        write_text(dir / "short.csv", "time_s,current_a,voltage_v\n0,1,4.0\n1,1,3.9\n");
        CHECK_THROWS_WITH_AS(load_voltage_csv(dir / "short.csv"), doctest::Contains("at least 10 rows"), Error);

        write_text(dir / "nan.csv", "time_s,current_a,voltage_v\n0,1,4.0\n1,1,nan\n2,1,3.8\n");
        CHECK_THROWS_WITH_AS(load_voltage_csv(dir / "nan.csv", relaxed(3)), doctest::Contains(":3"), Error);

        write_text(dir / "cols.csv", "t,current_a,voltage_v\n0,1,4.0\n1,1,3.9\n2,1,3.8\n");
        CHECK_THROWS_WITH_AS(load_voltage_csv(dir / "cols.csv", relaxed(3)), doctest::Contains("time_s"), Error);

        auto spec = relaxed(3);
        spec.current_unit = "mA";
        CHECK_THROWS_AS(load_voltage_csv(dir / "cols.csv", spec), Error);
        CHECK_THROWS_AS(load_voltage_csv(dir / "absent.csv"), Error);
    }

    TEST_CASE("capacity-voltage format takes charge directly")
    {
        const auto dir = support::scratch_dir("capacity_format");
        write_text(dir / "qv.csv", "charge_ah,voltage_v\n0,4.0\n0.5,3.9\n1.5,3.5\n");
        auto spec = relaxed(3);
        spec.format = MeasurementFormat::capacity_voltage;
        const auto t = load_voltage_csv(dir / "qv.csv", spec);
        CHECK(t.capacity() == 1.5);
        CHECK(t.samples[1].charge_ah == 0.5);
    }

    TEST_CASE("exported trace reloads to the same samples")
    {
        const auto dir = support::scratch_dir("trace_roundtrip");
        const auto& t = support::fresh_trace();
        save_trace_csv(t, dir / "t.csv");
        auto spec = MeasurementFileSpec{};
        spec.format = MeasurementFormat::capacity_voltage;
        const auto back = load_voltage_csv(dir / "t.csv", spec);
        REQUIRE(back.samples.size() == t.samples.size());
        for (std::size_t i = 0; i < t.samples.size(); ++i) {
            CHECK(back.samples[i].time_s == round_export(t.samples[i].time_s));
            CHECK(back.samples[i].charge_ah == round_export(t.samples[i].charge_ah));
            CHECK(back.samples[i].voltage_v == round_export(t.samples[i].voltage_v));
            CHECK(back.samples[i].current_a == round_export(t.samples[i].current_a));
        }
        // reloading with trapezoid integration agrees within float round trip
        const auto integrated = load_voltage_csv(dir / "t.csv");
        CHECK(integrated.capacity() == doctest::Approx(t.capacity()).epsilon(1e-6));
    }

    TEST_CASE("number formatting uses nine significant digits")
    {
        CHECK(format_number(1.0 / 3.0) == "0.333333333");
        CHECK(format_number(27500.0) == "27500");
        CHECK(round_export(0.1234567891234) == 0.123456789);
    }

    TEST_CASE("bundled reference config loads and validates")
    {
        const auto& cell = support::reference_cell();
        CHECK_NOTHROW(validate(cell));
        CHECK(cell.negative.c_0 == 27500.0);
        CHECK(cell.negative.epsilon == 0.582);
        CHECK(cell.positive.epsilon == 0.54);
        CHECK(cell.ocp_negative.tag == ElectrodeTag::negative);
        CHECK(cell.ocp_positive.stoichiometry.size() > 10);
    }

    TEST_CASE("cell config round trip")
    {
        const auto dir = support::scratch_dir("config_roundtrip");
        const auto aged = apply_mechanisms(support::reference_cell(), {0.01, 0.02, 0.03});
        save_cell_config(aged, dir / "aged.json");
        const auto back = load_cell_config(dir / "aged.json");
        CHECK(back.ocp_negative == aged.ocp_negative);
        CHECK(back.negative.c_0 == round_export(aged.negative.c_0));
        CHECK(back.negative.epsilon == round_export(aged.negative.epsilon));
        CHECK(back.positive.epsilon == round_export(aged.positive.epsilon));
        save_cell_config(back, dir / "again.json");
        CHECK(load_cell_config(dir / "again.json") == back);
        CHECK(read_file(dir / "aged.json") == read_file(dir / "again.json"));

        // tables without a source file are written next to the config
        auto detached = back;
        detached.ocp_positive.source.clear();
        fs::create_directories(dir / "sub");
        save_cell_config(detached, dir / "sub" / "cell.json");
        CHECK(load_cell_config(dir / "sub" / "cell.json") == back);
    }

    TEST_CASE("config schema errors carry the field path")
    {
        const auto dir = support::scratch_dir("config_schema");
        fs::copy(support::data_dir() / "ocp_graphite.csv", dir / "ocp_graphite.csv");
        fs::copy(support::data_dir() / "ocp_nmc532.csv", dir / "ocp_nmc532.csv");
        std::string text = read_file(support::data_dir() / "cell.json");
        const auto pos = text.find("\"particle_radius\"");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 17, "\"particle_radiux\"");
        write_text(dir / "bad.json", text);
        CHECK_THROWS_WITH_AS(load_cell_config(dir / "bad.json"), doctest::Contains("negative.particle_radius"), Error);
        write_text(dir / "broken.json", "{ not json");
        CHECK_THROWS_AS(load_cell_config(dir / "broken.json"), Error);
    }

    TEST_CASE("report round trip")
    {
        const auto dir = support::scratch_dir("report_roundtrip");
        const auto r = sample_report();
        save_report(r, dir / "r.json");
        CHECK(load_report(dir / "r.json") == r);
        CHECK(report_from_json(report_to_json(r)) == r);

        auto no_trace = r;
        no_trace.search_trace = {};
        CHECK(report_from_json(report_to_json(r, false)) == no_trace);

        auto incomplete = r;
        incomplete.complete = false;
        incomplete.failure = "diagnose: every c_n0 candidate was skipped";
        CHECK(report_from_json(report_to_json(incomplete)) == incomplete);
        CHECK(format_report_text(r).find("c_n0") != std::string::npos);
    }

    TEST_CASE("report schema errors")
    {
        CHECK_THROWS_AS(report_from_json("[]"), Error);
        std::string text = report_to_json(sample_report());
        const auto pos = text.find("\"schema_version\": 1");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 19, "\"schema_version\": 7");
        CHECK_THROWS_WITH_AS(report_from_json(text), doctest::Contains("schema_version"), Error);
    }

    TEST_CASE("dca export round trip and header")
    {
        const auto dir = support::scratch_dir("dca_export");
        const auto dca = compute_dca(support::fresh_trace());
        export_dca(dca, dir / "d.csv");
        CHECK(read_file(dir / "d.csv").rfind("voltage_v,dq_dv_ah_per_v\n", 0) == 0);
        const auto back = load_dca_csv(dir / "d.csv");
        REQUIRE(back.samples.size() == dca.samples.size());
        for (std::size_t i = 0; i < dca.samples.size(); i += 50) {
            CHECK(back.samples[i].voltage_v == round_export(dca.samples[i].voltage_v));
            CHECK(back.samples[i].dq_dv == round_export(dca.samples[i].dq_dv));
        }
    }

    TEST_CASE("feature json round trip")
    {
        DcaFeatureSet f;
        f.low_voltage_peak = DcaFeature{3.5123, 812.25};
        f.search_windows.valley = {3.7, 3.9};
        CHECK(features_from_json(features_to_json(f)) == f);
        CHECK(features_to_json(f).find("\"high_voltage_valley\": null") != std::string::npos);
    }

    TEST_CASE("svg export parses as xml with one polyline per series")
    {
        const auto dir = support::scratch_dir("svg");
        const auto fresh = extract_features(support::fresh_trace());
        const auto aged = extract_features(simulate_constant_current(support::aged_cell(2.65e4, 0.561, 0.52), 0.05, 10.0));
        auto markers = feature_markers(fresh.features, "fresh");
        for (const auto& m : feature_markers(aged.features, "aged"))
            markers.push_back(m);
        CHECK(markers.size() == 4);
        export_plot_svg({{"fresh", fresh.curve}, {"aged <100k>", aged.curve}}, markers, dir / "p.svg");

        boost::property_tree::ptree tree;
        boost::property_tree::read_xml((dir / "p.svg").string(), tree);
        REQUIRE(tree.count("svg") == 1);
        CHECK(count_polylines(tree.get_child("svg")) == 2);
    }

    TEST_CASE("atomic write replaces the file and leaves no temporary behind")
    {
        const auto dir = support::scratch_dir("atomic");
        write_file_atomic(dir / "x.txt", "one");
        write_file_atomic(dir / "x.txt", "two");
        CHECK(read_file(dir / "x.txt") == "two");
        std::size_t n = 0;
        for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir))
            ++n;
        CHECK(n == 1);
    }
}
