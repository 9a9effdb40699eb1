#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slfv/params.hpp"

namespace slfv {

using Json = nlohmann::ordered_json;

Json to_json(const ScalingParams& p);
Json to_json(const EventLaw& law);
Json to_json(const LimitParams& lp);
ScalingParams scaling_from_json(const Json& j);
EventLaw law_from_json(const Json& j);

/// Shortest round-trip decimal form.
std::string format_real(double x);

/// CSV table with a fixed header; cells are written as they are added.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    CsvWriter& cell(double x);
    CsvWriter& cell(long long x);
    CsvWriter& cell(std::size_t x) { return cell(static_cast<long long>(x)); }
    CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
    CsvWriter& cell(const std::string& s);
    void end_row();

private:
    void separator();
    std::ofstream out_;
    std::size_t columns_;
    std::size_t filled_ = 0;
};

/// FNV-1a 64-bit hash, printed as 16 hex digits.
std::string content_hash(const std::string& text);

void write_json(const std::filesystem::path& path, const Json& j);

} // namespace slfv
