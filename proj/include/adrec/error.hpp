#pragma once

#include <stdexcept>
#include <string>

namespace adrec {

// Error taxonomy shared by all modules. The CLI maps Input/Shape to exit
// code 2 and Numeric to exit code 3.
enum class ErrKind { Shape, Input, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrKind kind() const { return kind_; }

 private:
  ErrKind kind_;
};

inline Error shape_error(const std::string& what) { return Error(ErrKind::Shape, what); }
inline Error input_error(const std::string& what) { return Error(ErrKind::Input, what); }
inline Error numeric_error(const std::string& what) { return Error(ErrKind::Numeric, what); }

}  // namespace adrec
