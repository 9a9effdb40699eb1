#include "slfv/io.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace slfv {

Json to_json(const ScalingParams& p) {
    return Json{{"N", p.n_rate}, {"M", p.m_space}, {"J", p.j_impact}, {"K", p.k_density}, {"d", p.dimension}};
}

Json to_json(const EventLaw& law) {
    if (law.is_fixed()) return Json{{"kind", "fixed"}, {"r", law.fixed_radius().r}, {"u", law.fixed_radius().u}};
    return Json{{"kind", "variable"}, {"alpha", law.variable_radius().alpha}, {"gamma", law.variable_radius().gamma}};
}

Json to_json(const LimitParams& lp) {
    return Json{{"m", lp.m_diff}, {"kappa", lp.kappa}, {"beta", lp.beta}, {"kappa_generator", lp.kappa_generator}};
}

ScalingParams scaling_from_json(const Json& j) {
    ScalingParams p;
    p.n_rate = j.at("N").get<double>();
    p.m_space = j.at("M").get<double>();
    p.j_impact = j.at("J").get<double>();
    p.k_density = j.at("K").get<double>();
    p.dimension = j.value("d", 1);
    p.validate();
    return p;
}

EventLaw law_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "fixed") return EventLaw::fixed(j.at("r").get<double>(), j.at("u").get<double>());
    if (kind == "variable") return EventLaw::variable(j.at("alpha").get<double>(), j.at("gamma").get<double>());
    throw std::invalid_argument("unknown event law kind: " + kind);
}

std::string format_real(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::separator() {
    if (filled_ >= columns_) throw std::logic_error("CSV row has too many cells");
    if (filled_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::cell(double x) {
    separator();
    out_ << format_real(x);
    return *this;
}

CsvWriter& CsvWriter::cell(long long x) {
    separator();
    out_ << x;
    return *this;
}

CsvWriter& CsvWriter::cell(const std::string& s) {
    separator();
    if (s.find_first_of(",\"\n") == std::string::npos) {
        out_ << s;
    } else {
        out_ << '"';
        for (char c : s) out_ << (c == '"' ? "\"\"" : std::string(1, c));
        out_ << '"';
    }
    return *this;
}

void CsvWriter::end_row() {
    if (filled_ != columns_) throw std::logic_error("CSV row has too few cells");
    out_ << '\n';
    filled_ = 0;
}

std::string content_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace slfv
