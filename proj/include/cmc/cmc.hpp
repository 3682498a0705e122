#pragma once

#include "cmc/casestudies.hpp"
#include "cmc/congruence.hpp"
#include "cmc/equivalence.hpp"
#include "cmc/error.hpp"
#include "cmc/location.hpp"
#include "cmc/lts.hpp"
#include "cmc/names.hpp"
#include "cmc/operations.hpp"
#include "cmc/parser.hpp"
#include "cmc/printer.hpp"
#include "cmc/random.hpp"
#include "cmc/reduction.hpp"
#include "cmc/syntax.hpp"
