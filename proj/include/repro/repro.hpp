#pragma once

// Everything except the HTTP pieces (service.hpp, http_client.hpp), which
// pull in cpp-httplib.

#include "repro/corrections.hpp"
#include "repro/coverage.hpp"
#include "repro/dataset.hpp"
#include "repro/default_prompt.hpp"
#include "repro/extraction.hpp"
#include "repro/graph.hpp"
#include "repro/levenshtein.hpp"
#include "repro/likert.hpp"
#include "repro/report.hpp"
#include "repro/session.hpp"
#include "repro/study_io.hpp"
#include "repro/validate.hpp"
