// Copyright 2026 The sbx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SBX_ERROR_HPP_
#define SBX_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sbx {

enum class ErrorKind {
  unknown_operation,
  unknown_filter_key,
  unknown_filter_value,
  vocabulary,
  syntax,
  unsupported_version,
  unsupported_construct,
  regex_syntax,
  regex_too_complex,
  too_many_states,
  malformed_regex_blob,
  capacity_exceeded,
  malformed_blob,
  wrong_format_id,
  no_bundle_found,
  cycle_detected,
  dangling_offset,
  irreducible_graph,
  invalid_profile,
  io,
};

std::string_view to_string(ErrorKind kind);

// Every failure the library reports is an sbx::Error; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Position in SBPL source text, 1-based.
struct SourceSpan {
  std::size_t line = 1;
  std::size_t column = 1;
};

class SyntaxError : public Error {
 public:
  SyntaxError(SourceSpan span, const std::string& message)
      : Error(ErrorKind::syntax, std::to_string(span.line) + ":" +
                                     std::to_string(span.column) + ": " +
                                     message),
        span_(span) {}

  SourceSpan span() const noexcept { return span_; }

 private:
  SourceSpan span_;
};

// Offset-bearing decode failure (blob byte offset or regex record position).
class DecodeError : public Error {
 public:
  DecodeError(ErrorKind kind, std::size_t offset, const std::string& reason)
      : Error(kind, "at offset " + std::to_string(offset) + ": " + reason),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace sbx

#endif  // SBX_ERROR_HPP_
