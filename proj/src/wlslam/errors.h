/*
 * Copyright 2026 The WLSLAM Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WLSLAM_ERRORS_H_
#define WLSLAM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace wlslam {

enum class ErrorCode {
  kInvalidInput,
  kParse,
  kIo,
  kNoEstimate,
  kInsufficientCorrespondences,
  kNoMatch,
  kDuplicateEdge,
  kNotPositiveDefinite,
  kDisconnectedGraph,
  kNumericalFailure,
  kInsufficientConstraints,
  kTimestampMisalignment,
};

const char* ErrorCodeName(ErrorCode code);

// All failures raised by the library carry an ErrorCode so that the C API
// can map them onto stable status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wlslam

#endif  // WLSLAM_ERRORS_H_
