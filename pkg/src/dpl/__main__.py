from dpl.cli import main

raise SystemExit(main())
