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

#include <stdexcept>
#include <string>

namespace bmcp {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define BMCP_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& what) : Error(what) {}   \
    }

// clock-field
BMCP_DEFINE_ERROR(ZeroRateObject);
BMCP_DEFINE_ERROR(BoxTooLarge);
// dynamics-engine
BMCP_DEFINE_ERROR(WindowOverflow);
BMCP_DEFINE_ERROR(EmptyProcess);
BMCP_DEFINE_ERROR(NeverDies);
// couplings
BMCP_DEFINE_ERROR(HistoryUnavailable);
BMCP_DEFINE_ERROR(MonitorExhausted);
// percolation-paths
BMCP_DEFINE_ERROR(RecordIncomplete);
// exact-oracle
BMCP_DEFINE_ERROR(TooLarge);
BMCP_DEFINE_ERROR(SolveFailure);
// estimators
BMCP_DEFINE_ERROR(TooFewTrials);
BMCP_DEFINE_ERROR(InsufficientExtinctions);
BMCP_DEFINE_ERROR(InsufficientTrials);
// experiment-harness
BMCP_DEFINE_ERROR(ConfigInvalid);
BMCP_DEFINE_ERROR(OutputUnwritable);
BMCP_DEFINE_ERROR(UnknownSuite);
BMCP_DEFINE_ERROR(VersionMismatch);
BMCP_DEFINE_ERROR(DigestMismatch);

#undef BMCP_DEFINE_ERROR

}  // namespace bmcp
