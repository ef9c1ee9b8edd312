#ifndef QSPEC_CLI_HPP
#define QSPEC_CLI_HPP

#include <iosfwd>

namespace qspec
{
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCertification = 3;

// Entry point of the `qspec` tool; `out` receives CSV/JSON when no output
// path is given, `err` receives diagnostics.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace qspec

#endif // QSPEC_CLI_HPP
