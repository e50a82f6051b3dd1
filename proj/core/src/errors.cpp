#include "prunedoc/errors.hpp"

namespace prunedoc {

const char* to_string(ParseFailure failure) noexcept {
    switch (failure) {
        case ParseFailure::bad_magic: return "bad magic";
        case ParseFailure::version_mismatch: return "version mismatch";
        case ParseFailure::truncated: return "truncated";
        case ParseFailure::invariant_violation: return "invariant violation";
        case ParseFailure::malformed: return "malformed";
    }
    return "unknown";
}

}  // namespace prunedoc
