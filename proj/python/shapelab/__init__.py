"""shapelab: deterministic stimuli, small networks, and bias statistics.

The heavy lifting lives in the C++ extension ``_core``. An installed
package finds it inside this package; a build-tree checkout finds it on
``sys.path`` (the test harness points ``PYTHONPATH`` at the build
directory).
"""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __doc__ as _core_doc
except ImportError:  # build-tree layout: _core sits next to the build outputs
    from _core import *  # type: ignore # noqa: F401,F403
    from _core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
