#pragma once

#include <stdexcept>
#include <string>

namespace quadrica {

// Every library error carries a stable machine-readable code alongside the
// human message, so the CLI and tests can match on categories.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

inline Error invalid_place(const std::string& m) { return {"invalid-place", m}; }
inline Error invalid_input(const std::string& m) { return {"invalid-input", m}; }
inline Error dimension_error(const std::string& m) { return {"dimension", m}; }
inline Error rank_error(const std::string& m) { return {"rank", m}; }
inline Error validation_error(const std::string& m) { return {"validation", m}; }
inline Error precondition_error(const std::string& m) { return {"precondition", m}; }
inline Error search_exhausted(const std::string& m) { return {"search-exhausted", m}; }
inline Error invariant_error(const std::string& m) { return {"invariant", m}; }
inline Error faithfulness_violation(const std::string& m) { return {"faithfulness-violation", m}; }
inline Error singular_matrix(const std::string& m) { return {"singular-matrix", m}; }
inline Error degenerate_parabolic(const std::string& m) { return {"degenerate-parabolic", m}; }
inline Error no_intersection(const std::string& m) { return {"no-intersection", m}; }

} // namespace quadrica
