#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "error.hpp"
#include "harness.hpp"

namespace tpot {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

bool blank(std::string_view line) { return trim(line).empty(); }

std::optional<long long> as_integer(std::string_view s)
{
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

} // namespace

std::string read_text_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    require(f.good(), ErrorKind::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    require(!f.bad(), ErrorKind::Io, "read failed for " + path);
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    require(f.good(), ErrorKind::Io, "cannot open " + path + " for writing");
    f << text;
    f.flush();
    require(f.good(), ErrorKind::Io, "write failed for " + path);
}

LoadedCsv load_csv(const std::string& path, const std::string& label_column)
{
    const std::string text = read_text_file(path);
    std::vector<std::string_view> lines;
    std::vector<std::size_t> line_numbers;
    {
        std::string_view rest(text);
        std::size_t number = 0;
        while (!rest.empty()) {
            const auto nl = rest.find('\n');
            const auto line = rest.substr(0, nl);
            ++number;
            if (!blank(line)) {
                lines.push_back(line);
                line_numbers.push_back(number);
            }
            if (nl == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(nl + 1);
        }
    }
    require(!lines.empty(), ErrorKind::Parse, path + ": empty file");
    const auto header = split_fields(lines[0]);
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    require(label_it != header.end(), ErrorKind::Schema, path + ": no label column \"" + label_column + "\"");
    const auto label_at = static_cast<std::size_t>(label_it - header.begin());
    require(header.size() >= 2, ErrorKind::Schema, path + ": no feature columns");

    std::vector<std::string> names;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != label_at) {
            names.emplace_back(header[j]);
        }
    }
    const std::size_t n = lines.size() - 1;
    const std::size_t m = names.size();
    require(n > 0, ErrorKind::Parse, path + ": no data rows");
    std::vector<double> values(n * m);
    std::vector<std::string> raw_labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto fields = split_fields(lines[i + 1]);
        const std::string where = path + ": line " + std::to_string(line_numbers[i + 1]);
        require(fields.size() == header.size(), ErrorKind::Parse,
            where + ": expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
        std::size_t col = 0;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (j == label_at) {
                raw_labels[i] = std::string(fields[j]);
                continue;
            }
            const auto f = fields[j];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            require(!f.empty() && ec == std::errc() && ptr == f.data() + f.size(), ErrorKind::Parse,
                where + ", column \"" + names[col] + "\": not a number: \"" + std::string(f) + "\"");
            values[col * n + i] = v;
            ++col;
        }
        require(!raw_labels[i].empty(), ErrorKind::Parse, where + ": empty label");
    }

    LoadedCsv out;
    const bool all_integer = std::all_of(raw_labels.begin(), raw_labels.end(), [](const auto& s) { return as_integer(s).has_value(); });
    std::map<std::string, Label> code;
    if (all_integer) {
        std::map<long long, std::string> by_value;
        for (const auto& s : raw_labels) {
            by_value.emplace(*as_integer(s), s);
        }
        for (const auto& [value, s] : by_value) {
            code.emplace(s, static_cast<Label>(out.class_names.size()));
            out.class_names.push_back(s);
        }
        // Spellings like "01" and "1" share a code.
        for (const auto& s : raw_labels) {
            if (!code.contains(s)) {
                code.emplace(s, code.at(by_value.at(*as_integer(s))));
            }
        }
    } else {
        for (const auto& s : raw_labels) {
            if (code.emplace(s, static_cast<Label>(out.class_names.size())).second) {
                out.class_names.push_back(s);
            }
        }
    }
    LabelVector labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = code.at(raw_labels[i]);
    }
    const int classes = static_cast<int>(out.class_names.size());
    require(classes >= 2, ErrorKind::Schema, path + ": need at least two classes");
    out.data = Dataset(std::move(names), std::move(values), std::move(labels), classes);
    return out;
}

} // namespace tpot
