__version__ = '0.1.0'

from .utils import *
from .spectral import *
from .canonical import *
from .models import *
from .ordering import *
from .estimation import *
from .cli import *
