#include "iaa/report.hpp"

#include "temp_dir.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>

using namespace iaa;
using namespace iaa::report;
using testing_support::TempDir;

TEST(Csv, SplitHonoursQuotes) {
    EXPECT_EQ(split_csv_line("a,b,,c"), (std::vector<std::string>{"a", "b", "", "c"}));
    EXPECT_EQ(split_csv_line(R"(x,"y,z","q""r")"), (std::vector<std::string>{"x", "y,z", "q\"r"}));
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(split_csv_line(csv_field("he said \"hi\", twice"))[0], "he said \"hi\", twice");
    EXPECT_EQ(format_fixed6(0.5), "0.500000");
    EXPECT_EQ(format_fixed6(2.0 / 3.0), "0.666667");
}

TEST(Csv, MissingColumnThrows) {
    TempDir dir;
    std::ofstream(dir / "t.csv") << "a,b\n1,2\n";
    const auto t = read_csv(dir / "t.csv");
    EXPECT_EQ(t.column("b"), 1u);
    EXPECT_EQ(t.rows.size(), 1u);
    EXPECT_THROW(t.column("c"), ReportError);
}

TEST(PairsCsv, RoundTripKeepsUndefinedHausdorff) {
    TempDir dir;
    AgreementMap in;
    in["img,1"] = {{0, 1, 0.25, 3.0}, {0, 2, 0.0, std::nullopt}, {1, 2, 1.0, 0.0}};
    in["img2"] = {{0, 1, 2.0 / 3.0, std::sqrt(2.0)}};
    write_pairs_csv(in, dir / "pairs.csv");
    const auto t = read_csv(dir / "pairs.csv");
    EXPECT_EQ(t.header, (std::vector<std::string>{"image_id", "idx_a", "idx_b", "dice", "hausdorff", "flags"}));
    EXPECT_EQ(t.rows[1][t.column("flags")], "hausdorff_undefined");
    EXPECT_EQ(t.rows[1][t.column("hausdorff")], "");

    const auto out = read_pairs_csv(dir / "pairs.csv");
    ASSERT_EQ(out.size(), 2u);
    const auto& r = out.at("img,1");
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[1].mask_index_b, 2u);
    EXPECT_FALSE(r[1].hausdorff_defined());
    EXPECT_EQ(r[0].dice, 0.25);
    EXPECT_NEAR(out.at("img2")[0].dice, 2.0 / 3.0, 1e-6);
}

TEST(IaaJson, RoundTripAtFullPrecision) {
    TempDir dir;
    std::vector<ImageIaa> images{{{"a", 2.0 / 3.0, 3}, HausdorffSummary{2.5, 2, 1}}, {{"b", 0.1, 1}, std::nullopt}};
    write_iaa_json(images, dir / "iaa.json");
    const auto m = read_iaa_json(dir / "iaa.json");
    EXPECT_EQ(m.at("a").value, 2.0 / 3.0);
    EXPECT_EQ(m.at("a").pair_count, 3u);
    EXPECT_EQ(m.at("b").value, 0.1);

    std::ifstream in(dir / "iaa.json");
    const auto doc = nlohmann::json::parse(in);
    EXPECT_TRUE(doc["images"][1]["hausdorff_mean"].is_null());
    EXPECT_EQ(doc["images"][0]["hausdorff_excluded"], 1);
}

TEST(SplitCsv, RoundTrip) {
    TempDir dir;
    std::vector<SplitAssignment> s{{"a", Fold::Train, {false, 2, DiceBin::High}},
                                   {"b", Fold::Test, {true, 3, DiceBin::Low}}};
    write_split_csv(s, dir / "split.csv");
    const auto m = read_split_csv(dir / "split.csv");
    EXPECT_EQ(m.at("a"), Fold::Train);
    EXPECT_EQ(m.at("b"), Fold::Test);
    const auto t = read_csv(dir / "split.csv");
    EXPECT_EQ(t.rows[1][t.column("stratum")], "malignant/3/low");
}

TEST(TestReports, CarryFosdProvenance) {
    TempDir dir;
    const stats::Sample a({0.1, 0.2, 0.3}), b({0.4, 0.5, 0.6});
    const auto f = stats::fosd_test(a, b, stats::FosdHypothesis::ADominatesB, {200, 17, 1});
    const auto u = stats::mann_whitney(a, b);
    write_test_reports_json({to_report(u, "a vs b"), to_report(f, "a dominates b")}, dir / "stats.json");
    std::ifstream in(dir / "stats.json");
    const auto doc = nlohmann::json::parse(in);
    ASSERT_EQ(doc["tests"].size(), 2u);
    EXPECT_EQ(doc["tests"][1]["iterations"], 200);
    EXPECT_EQ(doc["tests"][1]["seed"], 17);
    EXPECT_EQ(doc["tests"][0]["n_a"], 3);
    EXPECT_DOUBLE_EQ(doc["tests"][0]["p_value"].get<double>(), u.p_value);
}
