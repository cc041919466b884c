#pragma once

#include "doctest.h"
#include "gnnrec/error.hpp"

#define CHECK_ERROR_CODE(expr, expected)                                  \
  do {                                                                    \
    bool thrown_ = false;                                                 \
    try {                                                                 \
      (void)(expr);                                                       \
    } catch (const gnnrec::Error& e_) {                                   \
      thrown_ = true;                                                     \
      CHECK(e_.code() == (expected));                                     \
    }                                                                     \
    CHECK_MESSAGE(thrown_, "expected " #expected);                        \
  } while (0)
