#ifndef QSPEC_REPORT_HPP
#define QSPEC_REPORT_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "qspec/emitter.hpp"

namespace qspec
{
inline constexpr int kCsvSchemaVersion = 1;

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string &text);

// 64-bit FNV-1a of the canonical JSON form of the model, as 16 hex digits.
std::string model_hash(const EmitterModel &model);

struct CsvTable
{
    std::string model_hash;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

// First line: "# schema-version: 1, model-hash: <hash>".
void write_csv(std::ostream &os, const CsvTable &table);
CsvTable read_csv(std::istream &is);

} // namespace qspec

#endif // QSPEC_REPORT_HPP
