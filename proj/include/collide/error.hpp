#pragma once

#include <stdexcept>
#include <string>

namespace collide {

enum class Errc {
    invalid_name,
    exists,
    collides_differing_name,
    parent_missing,
    not_a_directory,
    loop_limit_exceeded,
    dest_not_empty,
    host_is_case_insensitive,
    prompt_required,
    mount_not_case_insensitive,
    utility_missing,
    timeout,
    truncated_archive,
    unsupported_header,
    malformed_entry,
    ambiguous_evidence,
    bad_input,
};

inline const char* errc_name(Errc e) {
    switch (e) {
        case Errc::invalid_name: return "InvalidName";
        case Errc::exists: return "Exists";
        case Errc::collides_differing_name: return "CollidesDifferingName";
        case Errc::parent_missing: return "ParentMissing";
        case Errc::not_a_directory: return "NotADirectory";
        case Errc::loop_limit_exceeded: return "LoopLimitExceeded";
        case Errc::dest_not_empty: return "DestNotEmpty";
        case Errc::host_is_case_insensitive: return "HostIsCaseInsensitive";
        case Errc::prompt_required: return "PromptRequired";
        case Errc::mount_not_case_insensitive: return "MountNotCaseInsensitive";
        case Errc::utility_missing: return "UtilityMissing";
        case Errc::timeout: return "Timeout";
        case Errc::truncated_archive: return "TruncatedArchive";
        case Errc::unsupported_header: return "UnsupportedHeader";
        case Errc::malformed_entry: return "MalformedEntry";
        case Errc::ambiguous_evidence: return "AmbiguousEvidence";
        case Errc::bad_input: return "BadInput";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

}  // namespace collide
