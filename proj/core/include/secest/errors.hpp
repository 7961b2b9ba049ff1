#pragma once

#include <stdexcept>
#include <string>

namespace secest {

enum class Errc {
    dimension_mismatch,
    defective_matrix,
    not_jordan_form,
    ill_conditioned,
    unpaired_complex_block,
    intertwining_violated,
    not_observable,
    infeasible,
    inequality_violated,
    sparsity_violated,
    empty_coverage,
    non_finite_input,
    non_finite_state,
    invalid_parameter,
    parse_error,
    io_error,
};

inline const char* errc_name(Errc c) {
    switch (c) {
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::defective_matrix: return "DefectiveMatrix";
    case Errc::not_jordan_form: return "NotJordanForm";
    case Errc::ill_conditioned: return "IllConditioned";
    case Errc::unpaired_complex_block: return "UnpairedComplexBlock";
    case Errc::intertwining_violated: return "IntertwiningViolated";
    case Errc::not_observable: return "NotObservable";
    case Errc::infeasible: return "Infeasible";
    case Errc::inequality_violated: return "InequalityViolated";
    case Errc::sparsity_violated: return "SparsityViolated";
    case Errc::empty_coverage: return "EmptyCoverage";
    case Errc::non_finite_input: return "NonFiniteInput";
    case Errc::non_finite_state: return "NonFiniteState";
    case Errc::invalid_parameter: return "InvalidParameter";
    case Errc::parse_error: return "ParseError";
    case Errc::io_error: return "IoError";
    }
    return "UnknownError";
}

/// Library-wide exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace secest
