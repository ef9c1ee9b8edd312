#include "qspec/error.hpp"

namespace qspec
{
const char *to_string(Errc code)
{
    switch (code)
    {
    case Errc::InvalidModel: return "invalid-model";
    case Errc::InvalidPulse: return "invalid-pulse";
    case Errc::InvalidParameter: return "invalid-parameter";
    case Errc::PoleProximity: return "pole-proximity";
    case Errc::WindowTooSmall: return "window-too-small";
    case Errc::ZeroField: return "zero-field";
    case Errc::GridTooCoarse: return "grid-too-coarse";
    case Errc::NoRootCertified: return "no-root-certified";
    case Errc::WindowInsufficient: return "window-insufficient";
    case Errc::OptimizerFailure: return "optimizer-failure";
    case Errc::Config: return "config";
    }
    return "unknown";
}

} // namespace qspec
