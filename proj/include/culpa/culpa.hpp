#pragma once

#include "culpa/actual_cause.hpp"
#include "culpa/epistemic.hpp"
#include "culpa/formula.hpp"
#include "culpa/intention.hpp"
#include "culpa/responsibility.hpp"
#include "culpa/scenario.hpp"
#include "culpa/scm.hpp"
