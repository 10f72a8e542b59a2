#include "slh/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "slh/error.hpp"

namespace slh {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(delim, pos);
        if (next == std::string_view::npos) {
            out.push_back(trim(line.substr(pos)));
            break;
        }
        out.push_back(trim(line.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> lines_of(const std::string& text) {
    std::vector<std::string_view> lines;
    std::string_view all(text);
    std::size_t pos = 0;
    while (pos < all.size()) {
        std::size_t nl = all.find('\n', pos);
        if (nl == std::string_view::npos)
            nl = all.size();
        lines.push_back(all.substr(pos, nl - pos));
        pos = nl + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty())
        lines.pop_back();
    return lines;
}

} // namespace

PriceSeries::PriceSeries(std::vector<double> values, std::string label, std::int64_t start_index)
    : values_(std::move(values)), label_(std::move(label)), start_index_(start_index) {
    if (values_.size() < 2)
        throw Error(ErrorCode::TooShort, "series needs at least 2 samples, got " + std::to_string(values_.size()));
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            throw Error(ErrorCode::ParseError, "non-finite sample at index " + std::to_string(i));
}

PriceSeries PriceSeries::slice(std::size_t begin, std::size_t end, std::string label) const {
    if (begin >= end || end > values_.size())
        throw Error(ErrorCode::TauOutOfRange, "slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                                                  ") outside series of length " + std::to_string(values_.size()));
    return PriceSeries(std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(begin),
                                           values_.begin() + static_cast<std::ptrdiff_t>(end)),
                       std::move(label), start_index_ + static_cast<std::int64_t>(begin));
}

ColumnSpec ColumnSpec::parse(const std::string& text) {
    ColumnSpec c;
    const bool digits = !text.empty() && text.find_first_not_of("0123456789") == std::string::npos;
    if (digits) {
        c.index = std::stoul(text);
    } else {
        c.by_name = true;
        c.name = text;
    }
    return c;
}

std::string ColumnSpec::str() const { return by_name ? name : std::to_string(index); }

PriceSeries parse_price_text(const std::string& text, const ColumnSpec& column, std::string label) {
    const auto lines = lines_of(text);
    if (lines.empty())
        throw Error(ErrorCode::TooShort, "input is empty");

    const char delim = lines.front().find('\t') != std::string_view::npos ? '\t' : ',';
    std::size_t col = column.index;
    std::size_t first_data = 0;

    const auto head = split(lines.front(), delim);
    if (column.by_name) {
        std::size_t k = 0;
        while (k < head.size() && head[k] != column.name)
            ++k;
        if (k == head.size())
            throw ParseError(1, "column '" + column.name + "' not found in header");
        col = k;
        first_data = 1;
    } else {
        double dummy;
        if (col < head.size() && !parse_double(head[col], dummy))
            first_data = 1; // selected field is not numeric: treat line 1 as a header
    }

    std::vector<double> values;
    values.reserve(lines.size());
    for (std::size_t i = first_data; i < lines.size(); ++i) {
        const std::size_t row = i + 1;
        const auto fields = split(lines[i], delim);
        if (col >= fields.size())
            throw ParseError(row, "missing column " + std::to_string(col));
        if (fields[col].empty())
            throw ParseError(row, "empty value");
        double v;
        if (!parse_double(fields[col], v))
            throw ParseError(row, "cannot parse '" + std::string(fields[col]) + "' as a number");
        if (!std::isfinite(v))
            throw ParseError(row, "non-finite value");
        values.push_back(v);
    }
    if (values.size() < 2)
        throw Error(ErrorCode::TooShort, "need at least 2 samples, got " + std::to_string(values.size()));
    return PriceSeries(std::move(values), std::move(label));
}

PriceSeries load_price_series(const std::filesystem::path& path, const ColumnSpec& column) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_price_text(buf.str(), column, path.filename().string());
}

ReturnSeries compute_returns(const PriceSeries& series, std::size_t tau) {
    if (tau < 1 || tau >= series.size())
        throw Error(ErrorCode::TauOutOfRange,
                    "tau " + std::to_string(tau) + " not in [1, " + std::to_string(series.size() - 1) + "]");
    ReturnSeries r;
    r.tau = tau;
    r.source_label = series.label();
    const auto& v = series.values();
    r.values.resize(v.size() - tau);
    for (std::size_t i = 0; i < r.values.size(); ++i)
        r.values[i] = v[i + tau] - v[i];
    return r;
}

PriceSeries log_prices(const PriceSeries& series) {
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(series[i] > 0.0))
            throw Error(ErrorCode::ParseError, "log-prices needs positive samples; index " + std::to_string(i));
        out[i] = std::log(series[i]);
    }
    return PriceSeries(std::move(out), series.label(), series.start_index());
}

std::string to_csv(const PriceSeries& series, const std::string& header) {
    std::string out;
    out.reserve(series.size() * 24 + header.size() + 1);
    out += header;
    out += '\n';
    char buf[64];
    for (double v : series.values()) {
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        out.append(buf, res.ptr);
        out += '\n';
    }
    return out;
}

std::uint64_t content_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return s;
}

} // namespace slh
