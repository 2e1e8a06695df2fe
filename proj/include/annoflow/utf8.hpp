// Copyright 2026 The Annoflow Authors.
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

#ifndef ANNOFLOW_UTF8_HPP_
#define ANNOFLOW_UTF8_HPP_

#include <string>
#include <string_view>

namespace annoflow {

// Decodes UTF-8 into Unicode scalar values. Throws a validation Error
// (code "InvalidUtf8") on malformed input, surrogates or overlong forms.
std::u32string decode_utf8(std::string_view text);

std::string encode_utf8(std::u32string_view text);

// Number of scalar values in a valid UTF-8 string.
std::size_t scalar_length(std::string_view text);

}  // namespace annoflow

#endif  // ANNOFLOW_UTF8_HPP_
