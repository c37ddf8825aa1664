/*
   Copyright 2026 The bmcp Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>

namespace bmcp {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Append-only little-endian byte sink for canonical serializations.
class ByteWriter {
public:
    template <class T>
    ByteWriter& put(T v) {
        char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        bytes_.append(buf, sizeof(T));
        return *this;
    }
    ByteWriter& put_string(std::string_view s) {
        put<std::uint64_t>(s.size());
        bytes_.append(s);
        return *this;
    }
    const std::string& bytes() const { return bytes_; }
    std::string digest() const { return sha256_hex(bytes_); }

private:
    std::string bytes_;
};

}  // namespace bmcp
