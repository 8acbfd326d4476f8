#include "topodisc/csv.hpp"

#include <fstream>

#include "topodisc/error.hpp"

namespace topodisc {

std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw Error(ErrorCode::malformed, "unterminated quote in CSV line");
    fields.push_back(std::move(cur));
    return fields;
}

std::vector<std::string> read_csv(std::istream& in,
                                  const std::function<void(std::size_t, std::span<const std::string>)>& on_row) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::malformed, "CSV has no header row");
    std::vector<std::string> header = split_csv_line(line);
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        on_row(lineno, fields);
    }
    return header;
}

std::vector<std::string> read_csv(const std::filesystem::path& path,
                                  const std::function<void(std::size_t, std::span<const std::string>)>& on_row) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open: " + path.string());
    return read_csv(in, on_row);
}

std::vector<std::string> read_csv_header(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::malformed, "CSV has no header row: " + path.string());
    return split_csv_line(line);
}

}  // namespace topodisc
