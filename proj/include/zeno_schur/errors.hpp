#pragma once

#include <stdexcept>
#include <string>

namespace zeno_schur {

// Base for every error raised by the library. The CLI maps any of these to a
// nonzero exit status and a failure marker next to the requested output.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define ZS_DEFINE_ERROR(Name)                                      \
  class Name : public Error {                                      \
   public:                                                         \
    using Error::Error;                                            \
    const char* kind() const noexcept override { return #Name; }   \
  }

// tensor-core
ZS_DEFINE_ERROR(NotSymmetric);
ZS_DEFINE_ERROR(FastSectorNotPD);

// reduction
ZS_DEFINE_ERROR(FastSectorUnstable);
ZS_DEFINE_ERROR(NotPositiveDefinite);

// flow-engine
ZS_DEFINE_ERROR(DegenerateDraw);
ZS_DEFINE_ERROR(ZeroTensor);

// ensemble-stats
ZS_DEFINE_ERROR(NoValidRecords);

// fluct-recon
ZS_DEFINE_ERROR(UnstableDrift);
ZS_DEFINE_ERROR(ResponseNotPD);
ZS_DEFINE_ERROR(StepTooLarge);
ZS_DEFINE_ERROR(SingularCovariance);

// cli
ZS_DEFINE_ERROR(ConfigInvalid);
ZS_DEFINE_ERROR(IoFailure);

#undef ZS_DEFINE_ERROR

}  // namespace zeno_schur
