#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace slh {

// Ordered samples with a uniform time index: sample i sits at start_index + i.
class PriceSeries {
public:
    PriceSeries(std::vector<double> values, std::string label = {}, std::int64_t start_index = 0);

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::string& label() const noexcept { return label_; }
    std::int64_t start_index() const noexcept { return start_index_; }

    // Half-open sample range [begin, end) as a new series.
    PriceSeries slice(std::size_t begin, std::size_t end, std::string label) const;

private:
    std::vector<double> values_;
    std::string label_;
    std::int64_t start_index_;
};

struct ReturnSeries {
    std::size_t tau = 1;
    std::vector<double> values;
    std::string source_label;
};

// Column chosen by header name or by 0-based index.
struct ColumnSpec {
    bool by_name = false;
    std::string name;
    std::size_t index = 0;

    static ColumnSpec parse(const std::string& text); // all digits -> index, else name
    std::string str() const;
};

PriceSeries load_price_series(const std::filesystem::path& path, const ColumnSpec& column);
PriceSeries parse_price_text(const std::string& text, const ColumnSpec& column, std::string label);

ReturnSeries compute_returns(const PriceSeries& series, std::size_t tau);

// Natural log of every sample; requires strictly positive prices.
PriceSeries log_prices(const PriceSeries& series);

// One value per line, shortest round-trip formatting.
std::string to_csv(const PriceSeries& series, const std::string& header = "value");

std::uint64_t content_hash(const std::string& bytes);
std::string hash_hex(std::uint64_t h);

} // namespace slh
