#include "oscd/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "oscd/error.hpp"

namespace oscd {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        fail(ErrorCode::parse_error, "bad floating-point literal: '" + s + "'");
    }
    return v;
}

std::string FileStamp::comment_line() const {
    return "# oscd " + tool_version + " config=" + config_fingerprint;
}

void save_score_table(const ScoreTable& table, const std::string& path, const FileStamp& stamp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io_error, "cannot write score table: " + path);
    out << "# oscd score table v1; orientation: larger = more unknown\n";
    if (!stamp.empty()) out << stamp.comment_line() << "\n";
    out << "sample_id\tsplit\tgroup\tcategory\tpredicted_class";
    for (const auto& m : table.methods) out << "\t" << m;
    out << "\n";
    for (const auto& row : table.rows) {
        out << row.sample_id << "\t" << to_string(row.split) << "\t" << to_string(row.group) << "\t"
            << row.category << "\t" << row.predicted_class;
        for (double s : row.scores) out << "\t" << format_double(s);
        out << "\n";
    }
    if (!out) fail(ErrorCode::io_error, "write failure on score table: " + path);
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        const size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

} // namespace

ScoreTable load_score_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::missing_input, "cannot open score table: " + path);

    ScoreTable table;
    std::string line;
    size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_tabs(line);
        if (!header_seen) {
            if (fields.size() < 5 || fields[0] != "sample_id") {
                fail(ErrorCode::parse_error,
                     "score table line " + std::to_string(line_no) + ": bad header");
            }
            table.methods.assign(fields.begin() + 5, fields.end());
            header_seen = true;
            continue;
        }
        if (fields.size() != 5 + table.methods.size()) {
            fail(ErrorCode::parse_error,
                 "score table line " + std::to_string(line_no) + ": expected " +
                     std::to_string(5 + table.methods.size()) + " fields, got " +
                     std::to_string(fields.size()));
        }
        ScoreTableRow row;
        row.sample_id = fields[0];
        row.split = split_from_string(fields[1]);
        row.group = group_from_string(fields[2]);
        row.category = fields[3];
        row.predicted_class = std::stoi(fields[4]);
        row.scores.reserve(table.methods.size());
        for (size_t i = 5; i < fields.size(); ++i) row.scores.push_back(parse_double(fields[i]));
        table.rows.push_back(std::move(row));
    }
    if (!header_seen) fail(ErrorCode::parse_error, "score table has no header: " + path);
    return table;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io_error, "cannot write file: " + path);
    out << content;
    if (!out) fail(ErrorCode::io_error, "write failure: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::missing_input, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace oscd
