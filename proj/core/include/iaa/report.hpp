#pragma once

// File formats shared by the pipeline stages. CSV floats are written with
// six decimals and a header row; JSON keeps full precision.

#include "iaa/agreement.hpp"
#include "iaa/dataset.hpp"
#include "iaa/stats.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace iaa::report {

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);
/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(std::string_view text);
std::string format_fixed6(double value);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name` in the header; throws when absent.
    std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

// Pairwise agreement: image_id,idx_a,idx_b,dice,hausdorff,flags
void write_pairs_csv(const AgreementMap& agreements, const std::filesystem::path& path);
AgreementMap read_pairs_csv(const std::filesystem::path& path);

struct ImageIaa {
    IaaScore score;
    std::optional<HausdorffSummary> hausdorff;  // empty when every pair is undefined
};

// {"images": [{"image_id", "iaa", "pair_count", "hausdorff_mean", "hausdorff_used", "hausdorff_excluded"}]}
void write_iaa_json(const std::vector<ImageIaa>& images, const std::filesystem::path& path);
IaaMap read_iaa_json(const std::filesystem::path& path);

// image_id,fold,stratum
void write_split_csv(const std::vector<SplitAssignment>& split, const std::filesystem::path& path);
/// image_id -> fold
std::map<std::string, Fold> read_split_csv(const std::filesystem::path& path);

void write_factor_table_csv(const FactorTable& table, const std::filesystem::path& path);
void write_factor_table_json(const FactorTable& table, const std::filesystem::path& path);

struct TestReport {
    std::string test;        // "mann-whitney", "cohens-d", "fosd"
    std::string hypothesis;  // free text, e.g. "benign dominates malignant"
    double statistic = 0.0;
    std::optional<double> p_value;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    std::optional<std::size_t> iterations;
    std::optional<std::uint64_t> seed;
    bool degenerate = false;
};

TestReport to_report(const stats::UTestResult& r, std::string hypothesis);
TestReport to_report(const stats::FosdResult& r, std::string hypothesis);

void write_test_reports_json(const std::vector<TestReport>& reports, const std::filesystem::path& path);

}  // namespace iaa::report
