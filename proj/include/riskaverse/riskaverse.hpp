#pragma once

#include "riskaverse/distribution.hpp"
#include "riskaverse/evaluation.hpp"
#include "riskaverse/format.hpp"
#include "riskaverse/lemmas.hpp"
#include "riskaverse/mechanism.hpp"
#include "riskaverse/numeric.hpp"
#include "riskaverse/parse.hpp"
#include "riskaverse/report.hpp"
#include "riskaverse/utility.hpp"
