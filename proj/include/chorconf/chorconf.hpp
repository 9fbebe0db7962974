#pragma once

#include "chorconf/aut.hpp"
#include "chorconf/bpmn_xml.hpp"
#include "chorconf/composition.hpp"
#include "chorconf/conformance.hpp"
#include "chorconf/error.hpp"
#include "chorconf/lts.hpp"
#include "chorconf/model.hpp"
#include "chorconf/semantics.hpp"
#include "chorconf/text_syntax.hpp"
