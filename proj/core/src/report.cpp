#include "iaa/report.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace iaa::report {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ReportError("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw ReportError("failed writing " + path.string());
}

std::size_t parse_index(const std::string& text, const std::string& what) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) throw ReportError("bad " + what + " '" + text + "'");
    return v;
}

double parse_double(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ReportError("bad " + what + " '" + text + "'");
    }
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                fields.back() += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.emplace_back();
        } else {
            fields.back() += ch;
        }
    }
    if (quoted) throw ReportError("unterminated quote in CSV line");
    return fields;
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string format_fixed6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw ReportError("CSV is missing column '" + std::string(name) + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ReportError("cannot read " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ReportError(path.string() + ": empty CSV");
    table.header = split_csv_line(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != table.header.size()) {
            throw ReportError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(table.header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    return table;
}

void write_pairs_csv(const AgreementMap& agreements, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "image_id,idx_a,idx_b,dice,hausdorff,flags\n";
    for (const auto& [id, records] : agreements) {
        for (const auto& r : records) {
            out << csv_field(id) << ',' << r.mask_index_a << ',' << r.mask_index_b << ',' << format_fixed6(r.dice) << ','
                << (r.hausdorff ? format_fixed6(*r.hausdorff) : "") << ','
                << (r.hausdorff ? "" : "hausdorff_undefined") << '\n';
        }
    }
    finish(out, path);
}

AgreementMap read_pairs_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_id = t.column("image_id"), c_a = t.column("idx_a"), c_b = t.column("idx_b"),
                      c_dice = t.column("dice"), c_h = t.column("hausdorff");
    AgreementMap out;
    for (const auto& row : t.rows) {
        AgreementRecord r;
        r.mask_index_a = parse_index(row[c_a], "idx_a");
        r.mask_index_b = parse_index(row[c_b], "idx_b");
        if (r.mask_index_a >= r.mask_index_b) throw ReportError("pair indices must satisfy idx_a < idx_b");
        r.dice = parse_double(row[c_dice], "dice");
        if (!row[c_h].empty()) r.hausdorff = parse_double(row[c_h], "hausdorff");
        out[row[c_id]].push_back(r);
    }
    return out;
}

void write_iaa_json(const std::vector<ImageIaa>& images, const std::filesystem::path& path) {
    json arr = json::array();
    for (const auto& img : images) {
        json j = {{"image_id", img.score.image_id}, {"iaa", img.score.value}, {"pair_count", img.score.pair_count}};
        if (img.hausdorff) {
            j["hausdorff_mean"] = img.hausdorff->mean;
            j["hausdorff_used"] = img.hausdorff->used;
            j["hausdorff_excluded"] = img.hausdorff->excluded;
        } else {
            j["hausdorff_mean"] = nullptr;
            j["hausdorff_used"] = 0;
            j["hausdorff_excluded"] = img.score.pair_count;
        }
        arr.push_back(std::move(j));
    }
    auto out = open_out(path);
    out << json{{"images", arr}}.dump(2) << '\n';
    finish(out, path);
}

IaaMap read_iaa_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ReportError("cannot read " + path.string());
    IaaMap out;
    try {
        const json j = json::parse(in);
        for (const auto& img : j.at("images")) {
            IaaScore s;
            s.image_id = img.at("image_id").get<std::string>();
            s.value = img.at("iaa").get<double>();
            s.pair_count = img.at("pair_count").get<std::size_t>();
            if (!out.emplace(s.image_id, s).second) throw ReportError("duplicate image_id " + s.image_id);
        }
    } catch (const json::exception& e) {
        throw ReportError(path.string() + ": " + e.what());
    }
    return out;
}

void write_split_csv(const std::vector<SplitAssignment>& split, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "image_id,fold,stratum\n";
    for (const auto& s : split) out << csv_field(s.image_id) << ',' << to_string(s.fold) << ',' << to_string(s.stratum) << '\n';
    finish(out, path);
}

std::map<std::string, Fold> read_split_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_id = t.column("image_id"), c_fold = t.column("fold");
    std::map<std::string, Fold> out;
    for (const auto& row : t.rows) {
        if (!out.emplace(row[c_id], parse_fold(row[c_fold])).second) {
            throw ReportError("image " + row[c_id] + " appears twice in the split");
        }
    }
    return out;
}

void write_factor_table_csv(const FactorTable& table, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "factor,relation,malignancy,n_pairs,mean_dice,std_dice,mann_whitney_p,cohens_d\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_fixed6(*v) : std::string(); };
    for (const auto& r : table.rows) {
        out << to_string(r.factor) << ',' << to_string(r.relation) << ',' << to_string(r.subset) << ',' << r.n_pairs
            << ',' << (r.empty() ? "" : format_fixed6(r.mean_dice)) << ',' << (r.empty() ? "" : format_fixed6(r.std_dice))
            << ',' << opt(r.mann_whitney_p) << ',' << opt(r.cohens_d) << '\n';
    }
    finish(out, path);
}

void write_factor_table_json(const FactorTable& table, const std::filesystem::path& path) {
    json rows = json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"factor", to_string(r.factor)},
                        {"relation", to_string(r.relation)},
                        {"malignancy", to_string(r.subset)},
                        {"n_pairs", r.n_pairs},
                        {"mean_dice", r.empty() ? json(nullptr) : json(r.mean_dice)},
                        {"std_dice", r.empty() ? json(nullptr) : json(r.std_dice)},
                        {"mann_whitney_p", optional_json(r.mann_whitney_p)},
                        {"cohens_d", optional_json(r.cohens_d)}});
    }
    auto out = open_out(path);
    out << json{{"rows", rows}}.dump(2) << '\n';
    finish(out, path);
}

TestReport to_report(const stats::UTestResult& r, std::string hypothesis) {
    return {"mann-whitney", std::move(hypothesis), r.u_statistic, r.p_value, r.n_a, r.n_b, std::nullopt, std::nullopt,
            r.degenerate};
}

TestReport to_report(const stats::FosdResult& r, std::string hypothesis) {
    return {"fosd", std::move(hypothesis), r.statistic, r.p_value, r.n_a, r.n_b, r.bootstrap_iterations, r.seed,
            r.degenerate};
}

void write_test_reports_json(const std::vector<TestReport>& reports, const std::filesystem::path& path) {
    json arr = json::array();
    for (const auto& r : reports) {
        arr.push_back({{"test", r.test},
                       {"hypothesis", r.hypothesis},
                       {"statistic", r.statistic},
                       {"p_value", optional_json(r.p_value)},
                       {"n_a", r.n_a},
                       {"n_b", r.n_b},
                       {"iterations", r.iterations ? json(*r.iterations) : json(nullptr)},
                       {"seed", r.seed ? json(*r.seed) : json(nullptr)},
                       {"degenerate", r.degenerate}});
    }
    auto out = open_out(path);
    out << json{{"tests", arr}}.dump(2) << '\n';
    finish(out, path);
}

}  // namespace iaa::report
