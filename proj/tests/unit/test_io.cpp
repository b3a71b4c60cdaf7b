// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include <gtest/gtest.h>

#include "volte/io/config.hpp"
#include "volte/io/event_log_io.hpp"
#include "volte/io/manifest.hpp"
#include "volte/io/report_io.hpp"
#include "volte/io/trace_csv.hpp"

using namespace volte;

namespace {

std::string message_of(auto&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& s, std::string_view part) { return s.find(part) != std::string::npos; }

const std::string kHeader = std::string(io::kTraceCsvHeader) + "\n";

}  // namespace

TEST(TraceCsv, RoundTrip) {
    std::vector<codec::RtpRecord> t(3);
    for (int i = 0; i < 3; ++i) {
        t[i].stream_id = 1;
        t[i].seq = i;
        t[i].media_ts_ms = 20.0 * i;
        t[i].departure_ms = 20.0 * i + 0.25;
        t[i].payload_bytes = 33;
        t[i].talkspurt_start = i == 0;
        if (i != 1) {
            t[i].arrival_ms = 20.0 * i + 47.125;
        }
    }
    std::stringstream ss;
    io::write_trace_csv(ss, t);
    const auto back = io::read_trace_csv(ss);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_FALSE(back[1].arrival_ms);
    EXPECT_DOUBLE_EQ(*back[2].arrival_ms, 87.125);
    EXPECT_TRUE(back[0].talkspurt_start);
    EXPECT_EQ(back[2].payload_bytes, 33);
}

TEST(TraceCsv, ErrorsNameRow) {
    auto fail = [](const std::string& text) {
        std::istringstream in(text);
        return message_of([&] { io::read_trace_csv(in); });
    };
    EXPECT_TRUE(contains(fail(""), "empty"));
    EXPECT_TRUE(contains(fail("a,b\n"), "row 1"));
    EXPECT_TRUE(contains(fail(kHeader + "1,0,0,0,10,33,1\n1,x,20,20,30,33,0\n"), "row 3: bad seq"));
    EXPECT_TRUE(contains(fail(kHeader + "1,0,0,0,10,33\n"), "row 2: expected 7 fields"));
    EXPECT_TRUE(contains(fail(kHeader + "1,0,0,0,10,33,2\n"), "talkspurt_start"));
    EXPECT_TRUE(contains(fail(kHeader + "1,-1,0,0,10,33,0\n"), "seq must be"));
    EXPECT_TRUE(contains(fail(kHeader + "1,0,0,0,10,33,0\r\n"), "CRLF"));
    EXPECT_THROW(io::load_trace_csv("/nonexistent/trace.csv"), InputError);
}

TEST(Config, DefaultsRoundTrip) {
    const std::string a = io::to_ini(sim::ScenarioConfig{});
    const auto d = io::parse_config_draft(a, "x.ini");
    EXPECT_EQ(io::to_ini(d), a);
}

TEST(Config, EditedValuesRoundTrip) {
    const std::string text =
        "[scenario]\nname = edge\nduration_ms = 1234.5\nseed = 77\n"
        "[bundling]\nenabled = true\nmax_prb = 2\n"
        "[handover]\nperiodic_ms = 9000\ninject_at_ms = 100, 2500.5\n"
        "[radio]\noutages = 10:20, 30:45\n"
        "[link]\nsinr50_db = -5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, "
        "17, 18, 19, 20, 21, 22, 23\n";
    const auto cfg = io::parse_config(text, "x.ini");
    EXPECT_EQ(cfg.name, "edge");
    EXPECT_DOUBLE_EQ(cfg.duration_ms, 1234.5);
    EXPECT_EQ(cfg.seed, 77u);
    ASSERT_TRUE(cfg.bundling);
    EXPECT_EQ(cfg.bundling->max_prb, 2);
    ASSERT_TRUE(cfg.handover.periodic_ms);
    EXPECT_EQ(cfg.handover.inject_at_ms.size(), 2u);
    ASSERT_EQ(cfg.radio_source.outages.size(), 2u);
    EXPECT_DOUBLE_EQ(cfg.radio_source.outages[1].end_ms, 45.0);
    const auto canon = io::to_ini(cfg);
    EXPECT_EQ(io::to_ini(io::parse_config(canon, "canon.ini")), canon);
}

TEST(Config, ErrorsCarryLineAndField) {
    const auto unknown = message_of([] { io::parse_config("[codec]\nrate_kbps = 12.65\nfoo = 1\n", "x.ini"); });
    EXPECT_TRUE(contains(unknown, "x.ini:3")) << unknown;
    EXPECT_TRUE(contains(unknown, "unknown key 'foo' in [codec]")) << unknown;

    const auto bad = message_of([] { io::parse_config("[codec]\nrate_kbps = fast\n", "x.ini"); });
    EXPECT_TRUE(contains(bad, "x.ini:2")) << bad;
    EXPECT_TRUE(contains(bad, "codec.rate_kbps")) << bad;

    const auto invalid = message_of([] { io::parse_config("[scenario]\nduration_ms = 0\n", "x.ini"); });
    EXPECT_TRUE(contains(invalid, "duration_ms")) << invalid;

    EXPECT_THROW(io::parse_config("[codec\n", "x.ini"), ConfigError);
    EXPECT_THROW(io::read_text_file("/nonexistent/x.ini", "config"), ConfigError);
}

TEST(Config, Overrides) {
    auto d = io::parse_config_draft("", "x.ini");
    io::apply_override(d, "scheduler.target_bler = 0.05");
    io::apply_override(d, "bundling.enabled=true");
    const auto cfg = d.finish();
    EXPECT_DOUBLE_EQ(cfg.policy.target_bler, 0.05);
    EXPECT_TRUE(cfg.bundling);
    EXPECT_THROW(io::apply_override(d, "nonsense"), ConfigError);
    EXPECT_THROW(io::apply_override(d, "codec.nope=1"), ConfigError);
    EXPECT_THROW(io::apply_override(d, "codec.rate_kbps=abc"), ConfigError);
}

TEST(Config, RelativePathsResolveAgainstBase) {
    const auto cfg = io::parse_config_draft("[radio]\ntrace = drive.csv\n", "x.ini", "/data/runs").finish();
    EXPECT_EQ(cfg.radio_source.trace_path, "/data/runs/drive.csv");
}

TEST(Manifest, KnownDigestAndRoundTrip) {
    EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    io::RunManifest m;
    m.command = "simulate";
    m.scenario = "demo";
    m.seed = 3;
    m.config_text = "[scenario]\nseed = 3\n";
    m.outputs["report.json"] = io::sha256_hex("{}");
    const auto back = io::RunManifest::from_json(m.to_json(), "m.json");
    EXPECT_EQ(back.digest(), m.digest());
    auto other = m;
    other.seed = 4;
    EXPECT_NE(other.digest(), m.digest());
}

TEST(Manifest, TamperedConfigRejected) {
    io::RunManifest m;
    m.command = "simulate";
    m.config_text = "a";
    auto j = nlohmann::json::parse(m.to_json());
    j["config"] = "b";
    EXPECT_THROW(io::RunManifest::from_json(j.dump(), "m.json"), ConfigError);
    EXPECT_THROW(io::RunManifest::from_json("not json", "m.json"), ConfigError);
}

namespace {

kpi::KpiReport small_report(double latency_step) {
    std::vector<codec::RtpRecord> t;
    for (int i = 0; i < 300; ++i) {
        if (i == 50) {
            continue;
        }
        codec::RtpRecord r;
        r.stream_id = 1;
        r.seq = i;
        r.media_ts_ms = 20.0 * i;
        r.departure_ms = r.media_ts_ms;
        r.arrival_ms = r.media_ts_ms + 40.0 + latency_step * (i % 3);
        r.talkspurt_start = i == 0;
        t.push_back(r);
    }
    return kpi::build_report(t, kpi::ReportOptions{});
}

}  // namespace

TEST(Report, JsonSectionsAndTables) {
    const auto r = small_report(2.0);
    const auto j = io::report_json(r, kpi::ReportOptions{});
    EXPECT_EQ(j["schema_version"], kpi::kReportSchemaVersion);
    EXPECT_EQ(j["errors"]["E"], 1);
    EXPECT_FALSE(j.contains("rf_binned"));
    EXPECT_FALSE(j.contains("handover"));
    const auto tables = io::report_tables(r);
    EXPECT_TRUE(tables.count("summary.csv"));
    EXPECT_TRUE(tables.count("jitter_series.csv"));
    EXPECT_FALSE(tables.count("rf_binned.csv"));
}

TEST(Report, SelfCompareIsZero) {
    const auto a = io::report_json(small_report(2.0), kpi::ReportOptions{});
    const auto rows = io::compare_reports(a, a);
    ASSERT_FALSE(rows.empty());
    for (const auto& row : rows) {
        EXPECT_EQ(row.delta, 0.0) << row.kpi;
        EXPECT_EQ(row.verdict, "A=B") << row.kpi;
    }
}

TEST(Report, CompareSigns) {
    const auto a = io::report_json(small_report(6.0), kpi::ReportOptions{});
    const auto b = io::report_json(small_report(1.0), kpi::ReportOptions{});
    const auto rows = io::compare_reports(a, b);
    const auto it = std::find_if(rows.begin(), rows.end(),
                                 [](const io::CompareRow& r) { return r.kpi == "jitter_stats.avg"; });
    ASSERT_NE(it, rows.end());
    EXPECT_GT(it->delta, 0.0);
    EXPECT_EQ(it->verdict, "A>B");
    EXPECT_TRUE(contains(io::compare_csv(rows), "jitter_stats.avg"));
}

TEST(Report, SchemaMismatchRejected) {
    auto a = io::report_json(small_report(2.0), kpi::ReportOptions{});
    auto b = a;
    b["schema_version"] = 99;
    EXPECT_THROW(io::compare_reports(a, b), InputError);
    EXPECT_THROW(io::parse_report("{\"x\":1}", "r.json"), InputError);
}

TEST(EventLog, CsvHasHeaderAndRows) {
    sim::EventLog log;
    codec::RtpRecord r;
    r.stream_id = 1;
    log.add(0, sim::DepartureEvent{r});
    log.add(ms_to_us(30), sim::ArrivalEvent{r});
    log.add(ms_to_us(40), sim::LossEvent{1, 2, sim::LossReason::PdcpDiscard});
    std::ostringstream os;
    io::write_event_log_csv(os, log);
    const auto s = os.str();
    EXPECT_EQ(s.rfind(io::kEventCsvHeader, 0), 0u);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
    EXPECT_TRUE(contains(s, "pdcp_discard"));
}
