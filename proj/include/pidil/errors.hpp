// Error taxonomy shared by every module; kinds map onto CLI exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace pidil {

enum class errc {
    parse_error,          // malformed JSON or wire-format violation
    dimension_mismatch,   // incompatible matrix/tuple shapes
    not_hermitian,
    not_psd,
    ambiguous_support,    // final projection fits under several initial projections
    not_a_partition,      // projections do not partition the identity
    not_stabilizing,      // P_k T_i (or T_i P_k) is neither T_i nor 0
    annihilated_block,    // some block satisfies T_i P_k = 0 for every i
    normalization_failed, // ranges and co-ranges do not span the whole space
    non_commuting_families,
    too_many_blocks,      // partition enumeration cap
    invalid_partition,    // bad vertex partition for graph deformation
    lemma_violation,      // defect blocks with distinct range vertices overlap
    verification_failed,  // constructed dilation failed its own contract
    span_mismatch,        // spanning sets of two dilations are incompatible
    depth_overflow,       // path enumeration cap
};

inline const char* errc_name(errc c) {
    switch (c) {
    case errc::parse_error: return "ParseError";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::not_hermitian: return "NotHermitian";
    case errc::not_psd: return "NotPSD";
    case errc::ambiguous_support: return "AmbiguousSupport";
    case errc::not_a_partition: return "NotAPartition";
    case errc::not_stabilizing: return "NotStabilizing";
    case errc::annihilated_block: return "AnnihilatedBlock";
    case errc::normalization_failed: return "NormalizationFailed";
    case errc::non_commuting_families: return "NonCommutingFamilies";
    case errc::too_many_blocks: return "TooManyBlocks";
    case errc::invalid_partition: return "InvalidPartition";
    case errc::lemma_violation: return "LemmaViolation";
    case errc::verification_failed: return "VerificationFailed";
    case errc::span_mismatch: return "SpanMismatch";
    case errc::depth_overflow: return "DepthOverflow";
    }
    return "UnknownError";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

} // namespace pidil
