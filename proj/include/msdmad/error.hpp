#pragma once

#include <stdexcept>
#include <string>

namespace msdmad {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define MSDMAD_DEFINE_ERROR(NAME)                    \
    struct NAME : Error {                            \
        explicit NAME(const std::string& msg)        \
            : Error(std::string(#NAME ": ") + msg) {} \
    }

// File and schema handling
MSDMAD_DEFINE_ERROR(ParseError);
MSDMAD_DEFINE_ERROR(ValidationError);
MSDMAD_DEFINE_ERROR(VersionMismatch);
MSDMAD_DEFINE_ERROR(IoError);
MSDMAD_DEFINE_ERROR(ConfigError);

// Protocol
MSDMAD_DEFINE_ERROR(EmptyInput);

// Geometry / morphing
MSDMAD_DEFINE_ERROR(CardinalityMismatch);
MSDMAD_DEFINE_ERROR(DegenerateInput);
MSDMAD_DEFINE_ERROR(DegenerateTriangle);
MSDMAD_DEFINE_ERROR(IndexOutOfRange);
MSDMAD_DEFINE_ERROR(ShapeMismatch);

// Embeddings / features
MSDMAD_DEFINE_ERROR(ModelLoadError);
MSDMAD_DEFINE_ERROR(ImageTooSmall);
MSDMAD_DEFINE_ERROR(DimensionMismatch);
MSDMAD_DEFINE_ERROR(ZeroVector);
MSDMAD_DEFINE_ERROR(AntipodalVectors);
MSDMAD_DEFINE_ERROR(WrongArity);

// Training / numerics
MSDMAD_DEFINE_ERROR(SingleClassInput);
MSDMAD_DEFINE_ERROR(NumericError);

// Metrics
MSDMAD_DEFINE_ERROR(EmptyClass);
MSDMAD_DEFINE_ERROR(EmptyScores);

#undef MSDMAD_DEFINE_ERROR

}  // namespace msdmad
