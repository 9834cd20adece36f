#ifndef DYADSCREEN_ERROR_H_
#define DYADSCREEN_ERROR_H_

#include <stdexcept>
#include <string>

namespace dyadscreen {

// Data or contract violation. what() is prefixed with the owning module,
// e.g. "corpus: unknown speaker 'nurse' at line 1".
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message),
        module_(std::move(module)),
        message_(message) {}

  const std::string& module() const { return module_; }
  const std::string& message() const { return message_; }

 private:
  std::string module_;
  std::string message_;
};

}  // namespace dyadscreen

#endif  // DYADSCREEN_ERROR_H_
