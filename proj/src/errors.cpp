#include "stefan/errors.hpp"

// The exception types are header-only; this TU exists so the library always
// has the header in its compile set (keeps include hygiene checked).
