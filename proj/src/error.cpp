#include "slowfast/error.hpp"

namespace slowfast {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::contract: return "contract";
    case ErrorKind::overflow: return "overflow";
    case ErrorKind::stiffness: return "stiffness";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::domain: return "domain";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

}  // namespace slowfast
