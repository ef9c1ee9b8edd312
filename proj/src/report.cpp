#include "qspec/report.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace qspec
{
std::string format_double(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string &text)
{
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw Error(Errc::Config, "number", "cannot parse '" + text + "' as a number");
    return value;
}

std::string model_hash(const EmitterModel &model)
{
    const std::string canonical = emitter_to_json(model).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical)
    {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace
{
std::vector<std::string> split(const std::string &line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

void write_row(std::ostream &os, const std::vector<std::string> &row)
{
    for (std::size_t i = 0; i < row.size(); ++i)
        os << (i ? "," : "") << row[i];
    os << '\n';
}
} // namespace

void write_csv(std::ostream &os, const CsvTable &table)
{
    os << "# schema-version: " << kCsvSchemaVersion << ", model-hash: " << table.model_hash << '\n';
    write_row(os, table.header);
    for (const auto &row : table.rows)
        write_row(os, row);
}

CsvTable read_csv(std::istream &is)
{
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(is, line))
    {
        if (line.empty())
            continue;
        if (line[0] == '#')
        {
            const auto pos = line.find("model-hash:");
            if (pos != std::string::npos)
            {
                std::string h = line.substr(pos + 11);
                h.erase(0, h.find_first_not_of(' '));
                table.model_hash = h;
            }
            continue;
        }
        if (!have_header)
        {
            table.header = split(line);
            have_header = true;
        }
        else
            table.rows.push_back(split(line));
    }
    return table;
}

} // namespace qspec
