#ifndef CMFD_ERRORS_HPP
#define CMFD_ERRORS_HPP

#include <stdexcept>

namespace cmfd {

// Failure taxonomy: io_error for filesystem trouble, format_error for
// malformed or unsupported payloads, precondition_error for violated call
// contracts, degenerate_image_error for zero-mass moment input,
// metric_error when a score is mathematically undefined.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class io_error : public error {
 public:
  using error::error;
};

class format_error : public error {
 public:
  using error::error;
};

class precondition_error : public error {
 public:
  using error::error;
};

class degenerate_image_error : public error {
 public:
  using error::error;
};

class metric_error : public error {
 public:
  using error::error;
};

}  // namespace cmfd

#endif  // CMFD_ERRORS_HPP
